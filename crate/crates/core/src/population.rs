//! Post → account → user relations and coverage accounting against a
//! population register.
//!
//! Posts map many-one onto accounts (`a`), accounts many-one onto users
//! (`b`). An observed post sample `s_P` yields accounts `a(s_P)` and users
//! `b(a(s_P))`; comparing those users with the register gives under- and
//! over-coverage.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                Self(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

id_type!(PostId);
id_type!(AccountId);
id_type!(UserId);

/// The two many-one maps `a: post -> account` and `b: account -> user`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RelationTable {
    pub post_to_account: BTreeMap<PostId, AccountId>,
    pub account_to_user: BTreeMap<AccountId, UserId>,
}

impl RelationTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `post -> account`; a post already mapped elsewhere is an error.
    pub fn link_post(&mut self, post: PostId, account: AccountId) -> Result<()> {
        insert_many_one(&mut self.post_to_account, post, account, "post")
    }

    pub fn link_account(&mut self, account: AccountId, user: UserId) -> Result<()> {
        insert_many_one(&mut self.account_to_user, account, user, "account")
    }

    pub fn from_csv_files(posts: &Path, accounts: &Path) -> Result<Self> {
        let mut rel = Self::new();
        for (p, a) in read_pairs(posts, "post_id", "account_id")? {
            rel.link_post(p.into(), a.into())?;
        }
        for (a, u) in read_pairs(accounts, "account_id", "user_id")? {
            rel.link_account(a.into(), u.into())?;
        }
        Ok(rel)
    }

    pub fn write_csv_files(&self, posts: &Path, accounts: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(posts)?;
        w.write_record(["post_id", "account_id"])?;
        for (p, a) in &self.post_to_account {
            w.write_record([p.as_str(), a.as_str()])?;
        }
        w.flush().map_err(|e| Error::io(posts, e))?;
        let mut w = csv::Writer::from_path(accounts)?;
        w.write_record(["account_id", "user_id"])?;
        for (a, u) in &self.account_to_user {
            w.write_record([a.as_str(), u.as_str()])?;
        }
        w.flush().map_err(|e| Error::io(accounts, e))?;
        Ok(())
    }
}

fn insert_many_one<K: Ord + Clone + fmt::Display, V: PartialEq>(
    map: &mut BTreeMap<K, V>,
    key: K,
    value: V,
    kind: &'static str,
) -> Result<()> {
    if key.to_string().is_empty() {
        return Err(Error::Parameter(format!("empty {kind} id")));
    }
    match map.get(&key) {
        Some(existing) if *existing != value => Err(Error::Parameter(format!(
            "{kind} {key} mapped to two different targets"
        ))),
        _ => {
            map.insert(key, value);
            Ok(())
        }
    }
}

fn read_pairs(path: &Path, left: &str, right: &str) -> Result<Vec<(String, String)>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::parse(path, format!("missing column {name:?}")))
    };
    let (li, ri) = (col(left)?, col(right)?);
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let (l, r) = (rec.get(li).unwrap_or("").trim(), rec.get(ri).unwrap_or("").trim());
        if l.is_empty() || r.is_empty() {
            return Err(Error::parse(path, format!("line {}: empty identifier", line + 2)));
        }
        out.push((l.to_owned(), r.to_owned()));
    }
    Ok(out)
}

/// Target population `U`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PopulationRegister {
    pub members: BTreeSet<UserId>,
}

impl PopulationRegister {
    pub fn new(members: impl IntoIterator<Item = UserId>) -> Self {
        Self {
            members: members.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, user: &UserId) -> bool {
        self.members.contains(user)
    }

    /// Reads a one-column `user_id` CSV. Repeated ids are rejected.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let headers = rdr.headers()?.clone();
        let idx = headers
            .iter()
            .position(|h| h.trim() == "user_id")
            .ok_or_else(|| Error::parse(path, "missing column \"user_id\""))?;
        let mut members = BTreeSet::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let id = rec.get(idx).unwrap_or("").trim();
            if id.is_empty() {
                return Err(Error::parse(path, format!("line {}: empty user_id", line + 2)));
            }
            if !members.insert(UserId::new(id)) {
                return Err(Error::parse(path, format!("line {}: duplicate user_id {id}", line + 2)));
            }
        }
        Ok(Self { members })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["user_id"])?;
        for u in &self.members {
            w.write_record([u.as_str()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// `a(posts)`. Every post must be known.
pub fn accounts_of<'a>(
    posts: impl IntoIterator<Item = &'a PostId>,
    rel: &RelationTable,
) -> Result<BTreeSet<AccountId>> {
    posts
        .into_iter()
        .map(|p| {
            rel.post_to_account
                .get(p)
                .cloned()
                .ok_or_else(|| Error::MissingRelation {
                    kind: "post",
                    id: p.0.clone(),
                })
        })
        .collect()
}

/// `b(accounts)`. Every account must be known; see [`resolve_users`] for
/// the lenient variant.
pub fn users_of<'a>(
    accounts: impl IntoIterator<Item = &'a AccountId>,
    rel: &RelationTable,
) -> Result<BTreeSet<UserId>> {
    accounts
        .into_iter()
        .map(|a| {
            rel.account_to_user
                .get(a)
                .cloned()
                .ok_or_else(|| Error::MissingRelation {
                    kind: "account",
                    id: a.0.clone(),
                })
        })
        .collect()
}

/// Users reached by a set of accounts, with accounts lacking a known user
/// listed separately instead of failing.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct UserResolution {
    pub users: BTreeSet<UserId>,
    pub unresolved: BTreeSet<AccountId>,
}

pub fn resolve_users<'a>(
    accounts: impl IntoIterator<Item = &'a AccountId>,
    rel: &RelationTable,
) -> UserResolution {
    let mut out = UserResolution::default();
    for a in accounts {
        match rel.account_to_user.get(a) {
            Some(u) => {
                out.users.insert(u.clone());
            }
            None => {
                out.unresolved.insert(a.clone());
            }
        }
    }
    out
}

/// Preimage `a^-1(accounts)`; inactive accounts contribute nothing.
pub fn posts_of(accounts: &BTreeSet<AccountId>, rel: &RelationTable) -> BTreeSet<PostId> {
    rel.post_to_account
        .iter()
        .filter(|(_, a)| accounts.contains(a))
        .map(|(p, _)| p.clone())
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// `U ∩ s_AP`
    pub in_scope: BTreeSet<UserId>,
    /// `U \ s_AP`
    pub under: BTreeSet<UserId>,
    /// `s_AP \ U`
    pub over: BTreeSet<UserId>,
    /// Users reached through two or more accounts, with the account count.
    pub duplicate_users: BTreeMap<UserId, usize>,
}

/// Coverage of `users` against `register`. Duplicates are counted over every
/// account in `rel` that maps into `users`.
pub fn coverage_report(
    users: &BTreeSet<UserId>,
    register: &PopulationRegister,
    rel: &RelationTable,
) -> CoverageReport {
    let mut counts: BTreeMap<UserId, usize> = BTreeMap::new();
    for u in rel.account_to_user.values().filter(|u| users.contains(u)) {
        *counts.entry(u.clone()).or_default() += 1;
    }
    partition(users, register, counts)
}

/// Coverage for an observed account sample: users are `b(accounts)` and
/// duplicates count only accounts inside the sample. Unresolved accounts
/// are returned alongside.
pub fn coverage_report_for_accounts(
    accounts: &BTreeSet<AccountId>,
    register: &PopulationRegister,
    rel: &RelationTable,
) -> (CoverageReport, BTreeSet<AccountId>) {
    let resolved = resolve_users(accounts, rel);
    let mut counts: BTreeMap<UserId, usize> = BTreeMap::new();
    for a in accounts {
        if let Some(u) = rel.account_to_user.get(a) {
            *counts.entry(u.clone()).or_default() += 1;
        }
    }
    (partition(&resolved.users, register, counts), resolved.unresolved)
}

fn partition(
    users: &BTreeSet<UserId>,
    register: &PopulationRegister,
    counts: BTreeMap<UserId, usize>,
) -> CoverageReport {
    CoverageReport {
        in_scope: users.intersection(&register.members).cloned().collect(),
        under: register.members.difference(users).cloned().collect(),
        over: users.difference(&register.members).cloned().collect(),
        duplicate_users: counts.into_iter().filter(|(_, n)| *n >= 2).collect(),
    }
}
