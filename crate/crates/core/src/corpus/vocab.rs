//! Word/index mapping with the two reserved decoder symbols.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use ndarray::Array1;

use crate::error::{Error, Result};

pub const START_TOKEN: &str = "#Start";
pub const END_TOKEN: &str = "#End";
pub const START: usize = 0;
pub const END: usize = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from tokenized sentences, numbering corpus words by
    /// first occurrence after the reserved symbols.
    pub fn build<S: AsRef<str>>(sentences: &[Vec<S>]) -> Result<Self> {
        if sentences.iter().all(|s| s.is_empty()) {
            return Err(Error::EmptyCorpus);
        }
        let mut vocab = Self::reserved_only();
        for token in sentences.iter().flatten() {
            vocab.insert(token.as_ref())?;
        }
        Ok(vocab)
    }

    /// Rebuilds a vocabulary from its ordered word list, which must start
    /// with the reserved symbols.
    pub fn from_words<S: AsRef<str>>(words: &[S]) -> Result<Self> {
        if words.len() < 2
            || words[START].as_ref() != START_TOKEN
            || words[END].as_ref() != END_TOKEN
        {
            return Err(Error::InvalidVocabulary(format!(
                "vocabulary must begin with {START_TOKEN} and {END_TOKEN}"
            )));
        }
        let mut vocab = Self::reserved_only();
        for w in &words[2..] {
            let w = w.as_ref();
            if vocab.index.contains_key(w) {
                return Err(Error::InvalidVocabulary(format!("duplicate token {w:?}")));
            }
            vocab.insert(w)?;
        }
        Ok(vocab)
    }

    fn reserved_only() -> Self {
        let mut index = HashMap::new();
        index.insert(START_TOKEN.to_string(), START);
        index.insert(END_TOKEN.to_string(), END);
        Self { words: vec![START_TOKEN.to_string(), END_TOKEN.to_string()], index }
    }

    fn insert(&mut self, token: &str) -> Result<usize> {
        if let Some(&i) = self.index.get(token) {
            if i == START || i == END {
                return Err(Error::InvalidVocabulary(format!(
                    "corpus uses reserved token {token:?}"
                )));
            }
            return Ok(i);
        }
        if token.is_empty() || token.chars().any(char::is_whitespace) {
            return Err(Error::InvalidVocabulary(format!("invalid token {token:?}")));
        }
        let i = self.words.len();
        self.words.push(token.to_string());
        self.index.insert(token.to_string(), i);
        Ok(i)
    }

    /// Vocabulary size including the reserved symbols.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn word(&self, index: usize) -> Option<&str> {
        self.words.get(index).map(String::as_str)
    }

    /// Maps tokens to indices, rejecting unknown and reserved tokens.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Vec<usize>> {
        tokens
            .iter()
            .map(|t| match self.index_of(t.as_ref()) {
                Some(i) if i != START && i != END => Ok(i),
                Some(_) => Err(Error::InvalidVocabulary(format!(
                    "reserved token {:?} inside a sentence",
                    t.as_ref()
                ))),
                None => Err(Error::UnknownToken(t.as_ref().to_string())),
            })
            .collect()
    }

    pub fn decode(&self, indices: &[usize]) -> Vec<&str> {
        indices.iter().map(|&i| self.words[i].as_str()).collect()
    }

    pub fn one_hot(&self, index: usize) -> Result<OneHotVector> {
        OneHotVector::new(index, self.len())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = self.words.join("\n");
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let words: Vec<&str> = text.lines().collect();
        Self::from_words(&words).map_err(|e| Error::format(path, e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OneHotVector {
    index: usize,
    dim: usize,
}

impl OneHotVector {
    pub fn new(index: usize, dim: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, size: dim });
        }
        Ok(Self { index, dim })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn to_dense(&self) -> Array1<f64> {
        let mut v = Array1::zeros(self.dim);
        v[self.index] = 1.0;
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(s: &[&[&str]]) -> Vec<Vec<String>> {
        s.iter().map(|x| x.iter().map(|w| w.to_string()).collect()).collect()
    }

    #[test]
    fn first_occurrence_order() {
        let v = Vocabulary::build(&corpus(&[&["a", "b"], &["b", "c"]])).unwrap();
        assert_eq!(v.words(), ["#Start", "#End", "a", "b", "c"]);
        assert_eq!(v.index_of("c"), Some(4));
    }

    #[test]
    fn sizes() {
        assert_eq!(Vocabulary::build(&corpus(&[&["x"]])).unwrap().len(), 3);
        assert_eq!(Vocabulary::build(&corpus(&[&["a", "a", "a"]])).unwrap().len(), 3);
    }

    #[test]
    fn empty_corpus_rejected() {
        assert!(matches!(Vocabulary::build::<String>(&[]), Err(Error::EmptyCorpus)));
        assert!(matches!(Vocabulary::build::<String>(&[vec![]]), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn reserved_token_in_corpus_rejected() {
        assert!(Vocabulary::build(&corpus(&[&["a", "#End"]])).is_err());
    }

    #[test]
    fn one_hot() {
        let v5 = Vocabulary::build(&corpus(&[&["a", "b", "c"]])).unwrap();
        assert_eq!(v5.one_hot(2).unwrap().to_dense().to_vec(), [0., 0., 1., 0., 0.]);
        let v3 = Vocabulary::build(&corpus(&[&["x"]])).unwrap();
        assert_eq!(v3.one_hot(0).unwrap().to_dense().to_vec(), [1., 0., 0.]);
        assert!(matches!(v5.one_hot(5), Err(Error::IndexOutOfRange { index: 5, size: 5 })));
    }

    #[test]
    fn one_hot_injective() {
        let v = Vocabulary::build(&corpus(&[&["a", "b", "c", "d"]])).unwrap();
        let dense: Vec<_> = (0..v.len()).map(|i| v.one_hot(i).unwrap().to_dense()).collect();
        for i in 0..dense.len() {
            assert_eq!(dense[i].sum(), 1.0);
            for j in 0..i {
                assert_ne!(dense[i], dense[j]);
            }
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.txt");
        let v = Vocabulary::build(&corpus(&[&["hello", "world"]])).unwrap();
        v.write(&path).unwrap();
        assert_eq!(Vocabulary::read(&path).unwrap(), v);
    }
}
