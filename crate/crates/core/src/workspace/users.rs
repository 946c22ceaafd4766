use std::collections::BTreeMap;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::catalog::{validate_identifier, IdentifierError};

/// Turns passwords into stored digests. The algorithm is a deployment choice.
pub trait PasswordDigester: Send + Sync {
    fn digest(&self, password: &str) -> String;
    fn verify(&self, password: &str, digest: &str) -> bool;
}

/// `sha256$<salt>$<hex digest of salt and password>` with a random 16-byte salt.
#[derive(Debug, Clone, Copy, Default)]
pub struct SaltedSha256;

fn salted(salt: &str, password: &str) -> String {
    hex::encode(Sha256::digest(format!("{salt}:{password}").as_bytes()))
}

impl PasswordDigester for SaltedSha256 {
    fn digest(&self, password: &str) -> String {
        let mut salt = [0u8; 16];
        rand::rng().fill_bytes(&mut salt);
        let salt = hex::encode(salt);
        format!("sha256${salt}${}", salted(&salt, password))
    }

    fn verify(&self, password: &str, digest: &str) -> bool {
        match digest.split('$').collect::<Vec<_>>().as_slice() {
            ["sha256", salt, hash] => salted(salt, password) == *hash,
            _ => false,
        }
    }
}

/// Deterministic stand-in for tests.
#[derive(Debug, Clone, Copy, Default)]
pub struct FakeDigester;

impl PasswordDigester for FakeDigester {
    fn digest(&self, password: &str) -> String {
        format!("fake${}", password.chars().rev().collect::<String>())
    }

    fn verify(&self, password: &str, digest: &str) -> bool {
        self.digest(password) == digest
    }
}

/// A stored account. The digest has no accessor and is never serialized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserAccount {
    pub username: String,
    password_digest: String,
    pub is_superuser: bool,
    pub can_create_role: bool,
}

impl UserAccount {
    pub fn profile(&self) -> UserProfile {
        UserProfile { username: self.username.clone(), is_superuser: self.is_superuser, can_create_role: self.can_create_role }
    }
}

/// The persisted form of an account, digest included. Only storage code
/// should see this type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredAccount {
    pub username: String,
    pub password_digest: String,
    #[serde(default)]
    pub is_superuser: bool,
    #[serde(default)]
    pub can_create_role: bool,
}

/// What interfaces may show about an account.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    pub username: String,
    pub is_superuser: bool,
    pub can_create_role: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewUser {
    pub username: String,
    pub password: String,
    #[serde(default)]
    pub is_superuser: bool,
    #[serde(default)]
    pub can_create_role: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum UserError {
    #[error(transparent)]
    Identifier(#[from] IdentifierError),
    #[error("the user name “{username}” is already taken")]
    DuplicateUsername { username: String },
    #[error("a password is required")]
    EmptyPassword,
    #[error("the user name or password is wrong")]
    InvalidCredentials,
}

pub struct UserDirectory {
    users: BTreeMap<String, UserAccount>,
    digester: Box<dyn PasswordDigester>,
}

impl std::fmt::Debug for UserDirectory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("UserDirectory").field("users", &self.users.keys().collect::<Vec<_>>()).finish()
    }
}

impl Default for UserDirectory {
    fn default() -> Self {
        UserDirectory::new(Box::new(SaltedSha256))
    }
}

impl UserDirectory {
    pub fn new(digester: Box<dyn PasswordDigester>) -> Self {
        UserDirectory { users: BTreeMap::new(), digester }
    }

    pub fn create_user(&mut self, new: NewUser) -> Result<UserProfile, UserError> {
        validate_identifier(&new.username)?;
        if self.users.contains_key(&new.username) {
            return Err(UserError::DuplicateUsername { username: new.username });
        }
        if new.password.is_empty() {
            return Err(UserError::EmptyPassword);
        }
        let account = UserAccount {
            username: new.username.clone(),
            password_digest: self.digester.digest(&new.password),
            is_superuser: new.is_superuser,
            can_create_role: new.can_create_role,
        };
        let profile = account.profile();
        self.users.insert(new.username, account);
        Ok(profile)
    }

    pub fn authenticate(&self, username: &str, password: &str) -> Result<UserProfile, UserError> {
        match self.users.get(username) {
            Some(a) if self.digester.verify(password, &a.password_digest) => Ok(a.profile()),
            _ => Err(UserError::InvalidCredentials),
        }
    }

    pub fn get(&self, username: &str) -> Option<UserProfile> {
        self.users.get(username).map(UserAccount::profile)
    }

    pub fn exists(&self, username: &str) -> bool {
        self.users.contains_key(username)
    }

    pub fn to_records(&self) -> Vec<StoredAccount> {
        self.users
            .values()
            .map(|a| StoredAccount { username: a.username.clone(), password_digest: a.password_digest.clone(), is_superuser: a.is_superuser, can_create_role: a.can_create_role })
            .collect()
    }

    /// Rebuilds a directory from stored records; names are validated again.
    pub fn from_records(records: Vec<StoredAccount>, digester: Box<dyn PasswordDigester>) -> Result<Self, UserError> {
        let mut d = UserDirectory::new(digester);
        for r in records {
            validate_identifier(&r.username)?;
            if d.users.contains_key(&r.username) {
                return Err(UserError::DuplicateUsername { username: r.username });
            }
            let account = UserAccount { username: r.username.clone(), password_digest: r.password_digest, is_superuser: r.is_superuser, can_create_role: r.can_create_role };
            d.users.insert(r.username, account);
        }
        Ok(d)
    }
}
