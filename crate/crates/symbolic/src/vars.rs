use crate::SymbolicError;

/// Ordered table of variable names. Indices are assigned in insertion order
/// and never change; duplicate names are rejected.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VarTable {
    names: Vec<String>,
}

pub(crate) fn is_valid_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl VarTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names<I, S>(names: I) -> Result<Self, SymbolicError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut t = Self::new();
        for n in names {
            t.add(n.as_ref())?;
        }
        Ok(t)
    }

    /// Adds a name and returns its index. `sin` and `cos` are reserved by
    /// the expression grammar and rejected here.
    pub fn add(&mut self, name: &str) -> Result<usize, SymbolicError> {
        if !is_valid_ident(name) || name == "sin" || name == "cos" {
            return Err(SymbolicError::InvalidVariableName(name.to_string()));
        }
        if self.index_of(name).is_some() {
            return Err(SymbolicError::DuplicateVariable(name.to_string()));
        }
        self.names.push(name.to_string());
        Ok(self.names.len() - 1)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_indices() {
        let mut t = VarTable::new();
        assert_eq!(t.add("x1").unwrap(), 0);
        assert_eq!(t.add("x2").unwrap(), 1);
        assert_eq!(t.index_of("x1"), Some(0));
        assert_eq!(t.index_of("x2"), Some(1));
        assert_eq!(t.name(1), "x2");
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn rejects_duplicates_and_bad_names() {
        let mut t = VarTable::new();
        t.add("x").unwrap();
        assert_eq!(
            t.add("x"),
            Err(SymbolicError::DuplicateVariable("x".into()))
        );
        assert!(matches!(
            t.add("1x"),
            Err(SymbolicError::InvalidVariableName(_))
        ));
        assert!(matches!(
            t.add("a-b"),
            Err(SymbolicError::InvalidVariableName(_))
        ));
        assert!(matches!(
            t.add("sin"),
            Err(SymbolicError::InvalidVariableName(_))
        ));
        assert!(t.add("_under").is_ok());
    }
}
