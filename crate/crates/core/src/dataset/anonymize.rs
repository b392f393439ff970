use std::collections::HashMap;

use hmac::{Hmac, KeyInit, Mac};
use sha2::Sha256;

use super::{DatasetError, StudentRecord};

/// Hex characters kept from the digest.
const KEY_HEX_LEN: usize = 16;

/// HMAC-SHA256 of `id` keyed by `salt`, truncated to 64 bits of hex.
pub fn student_key(id: &str, salt: &str) -> Result<String, DatasetError> {
    if salt.is_empty() {
        return Err(DatasetError::EmptySalt);
    }
    let mut mac = Hmac::<Sha256>::new_from_slice(salt.as_bytes()).expect("HMAC accepts any key length");
    mac.update(id.as_bytes());
    let digest = mac.finalize().into_bytes();
    let mut key = hex::encode(digest);
    key.truncate(KEY_HEX_LEN);
    Ok(key)
}

/// Replaces every student id with its keyed digest.
pub fn anonymize(records: &[StudentRecord], salt: &str) -> Result<Vec<StudentRecord>, DatasetError> {
    let mut seen: HashMap<String, &str> = HashMap::new();
    records
        .iter()
        .map(|r| {
            let key = student_key(&r.student_key, salt)?;
            if let Some(other) = seen.insert(key.clone(), &r.student_key) {
                if other == r.student_key {
                    return Err(DatasetError::DuplicateStudent(other.to_string()));
                }
                return Err(DatasetError::Collision(other.to_string(), r.student_key.clone()));
            }
            Ok(StudentRecord {
                student_key: key,
                ..r.clone()
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::CodeMark;

    fn record(id: &str) -> StudentRecord {
        StudentRecord {
            student_key: id.to_string(),
            objective: [0; 12],
            code_writing: [CodeMark::from_label(0).unwrap(); 3],
        }
    }

    #[test]
    fn keys_are_deterministic_and_salted() {
        let a = student_key("s3613612", "pepper").unwrap();
        assert_eq!(a, student_key("s3613612", "pepper").unwrap());
        assert_ne!(a, student_key("s3613612", "salt").unwrap());
        assert_eq!(a.len(), 16);
        assert!(!a.contains("3613612"));
        assert_eq!(student_key("x", ""), Err(DatasetError::EmptySalt));
    }

    #[test]
    fn cohort_keys_are_distinct() {
        let records: Vec<StudentRecord> = (0..243).map(|i| record(&format!("s{i:07}"))).collect();
        let out = anonymize(&records, "cohort").unwrap();
        let mut keys: Vec<&str> = out.iter().map(|r| r.student_key.as_str()).collect();
        keys.sort_unstable();
        keys.dedup();
        assert_eq!(keys.len(), 243);
        assert!(out.iter().all(|r| !r.student_key.starts_with('s')));
    }

    #[test]
    fn repeated_ids_are_rejected() {
        let records = vec![record("a"), record("a")];
        assert!(matches!(anonymize(&records, "k"), Err(DatasetError::DuplicateStudent(_))));
    }

    #[test]
    fn matches_reference_hmac() {
        // RFC 4231 test case 2: key "Jefe", data "what do ya want for nothing?".
        let key = student_key("what do ya want for nothing?", "Jefe").unwrap();
        assert_eq!(key, "5bdcc146bf60754e");
    }
}
