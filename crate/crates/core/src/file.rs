//! Files, requests and request sequences.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Opaque file identity. Cheap to clone.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FileId(Arc<str>);

impl FileId {
    pub fn new(id: impl AsRef<str>) -> Self {
        FileId(Arc::from(id.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for FileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for FileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for FileId {
    fn from(s: &str) -> Self {
        FileId::new(s)
    }
}

impl From<String> for FileId {
    fn from(s: String) -> Self {
        FileId(Arc::from(s))
    }
}

/// A cacheable file: identity, integer size and non-negative cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileSpec {
    pub id: FileId,
    pub size: u64,
    pub cost: Rational,
}

impl FileSpec {
    pub fn new(id: impl Into<FileId>, size: u64, cost: Rational) -> Result<Self> {
        let id = id.into();
        if size == 0 {
            return Err(Error::InvalidSize { id, size });
        }
        if !rational::is_nonnegative(&cost) {
            return Err(Error::NegativeCost { id });
        }
        Ok(FileSpec { id, size, cost })
    }

    /// A paging item: size 1, cost 1.
    pub fn unit(id: impl Into<FileId>) -> Self {
        FileSpec {
            id: id.into(),
            size: 1,
            cost: rational::one(),
        }
    }

    pub(crate) fn same_attributes(&self, other: &FileSpec) -> bool {
        self.size == other.size && self.cost == other.cost
    }
}

/// An ordered trace of file requests. Every request for a given id carries
/// the same size and cost.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RequestSequence {
    requests: Vec<FileSpec>,
}

impl RequestSequence {
    pub fn new(requests: Vec<FileSpec>) -> Result<Self> {
        let mut seen: HashMap<&FileId, &FileSpec> = HashMap::new();
        for (index, r) in requests.iter().enumerate() {
            match seen.get(&r.id) {
                Some(prev) if !prev.same_attributes(r) => {
                    return Err(Error::InconsistentFile {
                        id: r.id.clone(),
                        index,
                    })
                }
                Some(_) => {}
                None => {
                    seen.insert(&r.id, r);
                }
            }
        }
        Ok(RequestSequence { requests })
    }

    /// Paging trace where each id is a unit-size, unit-cost item.
    pub fn paging<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<FileId>,
    {
        RequestSequence {
            requests: ids.into_iter().map(FileSpec::unit).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    pub fn requests(&self) -> &[FileSpec] {
        &self.requests
    }

    pub fn iter(&self) -> std::slice::Iter<'_, FileSpec> {
        self.requests.iter()
    }

    /// Distinct files in order of first request.
    pub fn distinct_files(&self) -> Vec<FileSpec> {
        let mut seen = std::collections::HashSet::new();
        self.requests
            .iter()
            .filter(|r| seen.insert(r.id.clone()))
            .cloned()
            .collect()
    }

    pub fn max_size(&self) -> u64 {
        self.requests.iter().map(|r| r.size).max().unwrap_or(0)
    }

    /// Sum of costs over all requests, counting repeats.
    pub fn total_request_cost(&self) -> Rational {
        self.requests.iter().map(|r| r.cost.clone()).sum()
    }

    /// True when every request has size 1 (weighted caching).
    pub fn is_unit_size(&self) -> bool {
        self.requests.iter().all(|r| r.size == 1)
    }

    /// True when every request has size 1 and cost 1.
    pub fn is_paging(&self) -> bool {
        let one = rational::one();
        self.requests.iter().all(|r| r.size == 1 && r.cost == one)
    }

    pub fn ids(&self) -> Vec<FileId> {
        self.requests.iter().map(|r| r.id.clone()).collect()
    }
}

impl<'a> IntoIterator for &'a RequestSequence {
    type Item = &'a FileSpec;
    type IntoIter = std::slice::Iter<'a, FileSpec>;

    fn into_iter(self) -> Self::IntoIter {
        self.requests.iter()
    }
}

/// Per-position lookup of the next request for each file.
#[derive(Debug, Clone)]
pub struct FutureIndex {
    positions: HashMap<FileId, Vec<usize>>,
}

impl FutureIndex {
    pub fn new(seq: &RequestSequence) -> Self {
        let mut positions: HashMap<FileId, Vec<usize>> = HashMap::new();
        for (i, r) in seq.iter().enumerate() {
            positions.entry(r.id.clone()).or_default().push(i);
        }
        FutureIndex { positions }
    }

    /// First request of `id` strictly after position `pos`.
    pub fn next_after(&self, id: &FileId, pos: usize) -> Option<usize> {
        let list = self.positions.get(id)?;
        let at = list.partition_point(|&p| p <= pos);
        list.get(at).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn rejects_zero_size_and_negative_cost() {
        assert!(matches!(
            FileSpec::new("a", 0, int(1)),
            Err(Error::InvalidSize { .. })
        ));
        assert!(matches!(
            FileSpec::new("a", 1, int(-1)),
            Err(Error::NegativeCost { .. })
        ));
        assert!(FileSpec::new("a", 1, int(0)).is_ok());
    }

    #[test]
    fn sequence_requires_consistent_attributes() {
        let a = FileSpec::new("a", 2, int(4)).unwrap();
        let a2 = FileSpec::new("a", 2, int(5)).unwrap();
        let err = RequestSequence::new(vec![a.clone(), a2]).unwrap_err();
        assert_eq!(
            err,
            Error::InconsistentFile {
                id: "a".into(),
                index: 1
            }
        );
        assert!(RequestSequence::new(vec![a.clone(), a]).is_ok());
    }

    #[test]
    fn future_index_finds_next_occurrence() {
        let seq = RequestSequence::paging(["a", "b", "a", "c", "a"]);
        let fut = FutureIndex::new(&seq);
        let a = FileId::new("a");
        assert_eq!(fut.next_after(&a, 0), Some(2));
        assert_eq!(fut.next_after(&a, 2), Some(4));
        assert_eq!(fut.next_after(&a, 4), None);
        assert_eq!(fut.next_after(&FileId::new("z"), 0), None);
    }
}
