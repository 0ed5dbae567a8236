//! Seeded synthetic ground truth: a register, post/account/user relations,
//! residences, and both kinds of posts, so the pipelines can be scored
//! against known answers.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, Months, Utc};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{sample_normal, seeded_rng, SimRng};
use crate::one_phase::{write_posts_csv, Sentiment, SentimentPost};
use crate::population::{AccountId, PopulationRegister, PostId, RelationTable, UserId};
use crate::two_phase::{geo, write_json, write_jsonl, AddressType, Gazetteer, GazetteerEntry, GeoPost, Source};

/// Inclusive integer range, sampled uniformly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRange {
    pub min: usize,
    pub max: usize,
}

impl CountRange {
    pub const fn new(min: usize, max: usize) -> Self {
        Self { min, max }
    }

    fn sample(&self, rng: &mut SimRng) -> usize {
        rng.random_range(self.min..=self.max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub seed: u64,
    pub n_users: usize,
    pub accounts_per_user: CountRange,
    pub posts_per_account: CountRange,
    /// Spatial noise around the posting location, meters.
    pub home_noise_sd: f64,
    /// Share of an account's geolocated posts made at its one regular away
    /// site (a workplace, say) instead of at home.
    pub away_fraction: f64,
    /// Share of accounts that are bots.
    pub bot_fraction: f64,
    /// Share of users that are not persons (outside the register).
    pub non_person_fraction: f64,
    pub months: u32,
    pub start: DateTime<Utc>,
    /// Share of register persons with no accounts at all.
    pub offline_fraction: f64,
    /// Gazetteer size; 0 picks `max(100, 4 * n_users)`.
    pub n_addresses: usize,
    pub address_spacing_m: f64,
    pub residential_share: f64,
    pub origin_lat: f64,
    pub origin_lon: f64,
    /// Probability that a post arrives through the broker extract.
    pub broker_share: f64,
    /// Probability that a post appears in both extracts.
    pub duplicate_fraction: f64,
    pub no_gps_fraction: f64,
    pub foreign_fraction: f64,
    pub country: String,
    /// Whether bot posts carry `bot_flag`.
    pub flag_bots: bool,
    /// Probabilities of `y = -1, 0, 1`.
    pub y_probs: [f64; 3],
    pub sentiment_posts_per_month: CountRange,
    /// Probability a sentiment post carries the user's own `y`.
    pub sentiment_fidelity: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            n_users: 100,
            accounts_per_user: CountRange::new(1, 2),
            posts_per_account: CountRange::new(3, 12),
            home_noise_sd: 5.0,
            away_fraction: 0.0,
            bot_fraction: 0.0,
            non_person_fraction: 0.0,
            months: 7,
            start: DateTime::parse_from_rfc3339("2014-04-01T00:00:00Z")
                .expect("valid literal")
                .with_timezone(&Utc),
            offline_fraction: 0.0,
            n_addresses: 0,
            address_spacing_m: 150.0,
            residential_share: 0.6,
            origin_lat: 52.0,
            origin_lon: -1.5,
            broker_share: 1.0,
            duplicate_fraction: 0.0,
            no_gps_fraction: 0.0,
            foreign_fraction: 0.0,
            country: "GB".into(),
            flag_bots: true,
            y_probs: [0.3, 0.4, 0.3],
            sentiment_posts_per_month: CountRange::new(1, 3),
            sentiment_fidelity: 0.8,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let fractions = [
            ("away_fraction", self.away_fraction),
            ("bot_fraction", self.bot_fraction),
            ("non_person_fraction", self.non_person_fraction),
            ("offline_fraction", self.offline_fraction),
            ("residential_share", self.residential_share),
            ("broker_share", self.broker_share),
            ("duplicate_fraction", self.duplicate_fraction),
            ("no_gps_fraction", self.no_gps_fraction),
            ("foreign_fraction", self.foreign_fraction),
            ("sentiment_fidelity", self.sentiment_fidelity),
        ];
        for (name, v) in fractions {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Parameter(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if self.n_users == 0 || self.months == 0 {
            return Err(Error::Parameter("n_users and months must be positive".into()));
        }
        for (name, r) in [
            ("accounts_per_user", self.accounts_per_user),
            ("posts_per_account", self.posts_per_account),
            ("sentiment_posts_per_month", self.sentiment_posts_per_month),
        ] {
            if r.min == 0 || r.min > r.max {
                return Err(Error::Parameter(format!("{name} needs 1 <= min <= max")));
            }
        }
        if !(self.home_noise_sd >= 0.0) || !(self.address_spacing_m > 0.0) {
            return Err(Error::Parameter("noise must be >= 0 and spacing > 0".into()));
        }
        if self.y_probs.iter().any(|p| !(*p >= 0.0)) || (self.y_probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter("y_probs must be non-negative and sum to 1".into()));
        }
        if !geo::valid_coordinates(self.origin_lat, self.origin_lon) || self.origin_lat.abs() > 80.0 {
            return Err(Error::Parameter("origin must be a valid point below 80 degrees latitude".into()));
        }
        if self.country.len() != 2 {
            return Err(Error::Parameter("country must be a two-letter code".into()));
        }
        Ok(())
    }

    fn address_count(&self) -> usize {
        if self.n_addresses == 0 {
            (4 * self.n_users).max(100)
        } else {
            self.n_addresses
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Home {
    pub lat: f64,
    pub lon: f64,
    pub address_id: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub register: PopulationRegister,
    pub rel: RelationTable,
    /// Residence of every account belonging to a person.
    pub homes: BTreeMap<AccountId, Home>,
    /// `y_i` for every user, persons and non-persons alike.
    pub y_values: BTreeMap<UserId, i8>,
    pub non_person_accounts: BTreeSet<AccountId>,
    pub bot_accounts: BTreeSet<AccountId>,
}

impl GroundTruth {
    pub fn is_person_account(&self, account: &AccountId) -> bool {
        self.homes.contains_key(account)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimOutput {
    pub ground_truth: GroundTruth,
    pub gazetteer: Vec<GazetteerEntry>,
    /// Both extracts; a duplicated post appears once per source.
    pub geo_posts: Vec<GeoPost>,
    pub sentiment_posts: Vec<SentimentPost>,
}

/// Files written by [`SimOutput::write_to_dir`].
pub mod files {
    pub const API_POSTS: &str = "api_posts.jsonl";
    pub const BROKER_POSTS: &str = "broker_posts.jsonl";
    pub const GAZETTEER: &str = "gazetteer.csv";
    pub const SENTIMENT_POSTS: &str = "sentiment_posts.csv";
    pub const POST_ACCOUNTS: &str = "post_accounts.csv";
    pub const ACCOUNT_USERS: &str = "account_users.csv";
    pub const REGISTER: &str = "register.csv";
    pub const GROUND_TRUTH: &str = "ground_truth.json";
}

impl SimOutput {
    /// Writes every artifact in the formats the pipelines read.
    pub fn write_to_dir(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = |name: &str| dir.join(name);
        let (api, broker): (Vec<&GeoPost>, Vec<&GeoPost>) =
            self.geo_posts.iter().partition(|p| p.source == Source::Api);
        write_jsonl(&path(files::API_POSTS), api)?;
        write_jsonl(&path(files::BROKER_POSTS), broker)?;
        Gazetteer::new(self.gazetteer.clone())?.write_csv(&path(files::GAZETTEER))?;
        write_posts_csv(&self.sentiment_posts, &path(files::SENTIMENT_POSTS))?;
        self.ground_truth
            .rel
            .write_csv_files(&path(files::POST_ACCOUNTS), &path(files::ACCOUNT_USERS))?;
        self.ground_truth.register.write_csv(&path(files::REGISTER))?;
        write_json(&path(files::GROUND_TRUTH), &self.ground_truth)?;
        Ok([
            files::API_POSTS,
            files::BROKER_POSTS,
            files::GAZETTEER,
            files::SENTIMENT_POSTS,
            files::POST_ACCOUNTS,
            files::ACCOUNT_USERS,
            files::REGISTER,
            files::GROUND_TRUTH,
        ]
        .iter()
        .map(|f| path(f))
        .collect())
    }
}

impl GroundTruth {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
    }
}

fn bernoulli(rng: &mut SimRng, p: f64) -> bool {
    p > 0.0 && rng.random::<f64>() < p
}

fn jittered_gazetteer(cfg: &SimConfig, rng: &mut SimRng) -> Vec<GazetteerEntry> {
    let n = cfg.address_count();
    let side = (n as f64).sqrt().ceil() as usize;
    let jitter = 0.2 * cfg.address_spacing_m;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (row, col) = (i / side, i % side);
        let east = col as f64 * cfg.address_spacing_m + rng.random_range(-jitter..=jitter);
        let north = row as f64 * cfg.address_spacing_m + rng.random_range(-jitter..=jitter);
        let (lat, lon) = geo::offset(cfg.origin_lat, cfg.origin_lon, east, north);
        let address_type = match i {
            0 => AddressType::Residential,
            1 => AddressType::Commercial,
            _ if rng.random::<f64>() < cfg.residential_share => AddressType::Residential,
            _ if rng.random::<f64>() < 2.0 / 3.0 => AddressType::Commercial,
            _ => AddressType::Other,
        };
        out.push(GazetteerEntry {
            address_id: format!("addr{i:06}"),
            lat,
            lon,
            address_type,
        });
    }
    out
}

fn draw_y(cfg: &SimConfig, rng: &mut SimRng) -> i8 {
    let u: f64 = rng.random();
    if u < cfg.y_probs[0] {
        -1
    } else if u < cfg.y_probs[0] + cfg.y_probs[1] {
        0
    } else {
        1
    }
}

fn uniform_instant(rng: &mut SimRng, from: DateTime<Utc>, to: DateTime<Utc>) -> DateTime<Utc> {
    let secs = (to - from).num_seconds().max(1);
    from + Duration::seconds(rng.random_range(0..secs))
}

fn noisy(rng: &mut SimRng, lat: f64, lon: f64, sd: f64) -> (f64, f64) {
    let east = sample_normal(rng, 0.0, sd);
    let north = sample_normal(rng, 0.0, sd);
    geo::offset(lat, lon, east, north)
}

/// Generates a full synthetic dataset; identical configs give identical
/// output.
pub fn generate(cfg: &SimConfig) -> Result<SimOutput> {
    cfg.validate()?;
    let mut rng = seeded_rng(cfg.seed);
    let gazetteer = jittered_gazetteer(cfg, &mut rng);
    let residential: Vec<usize> = (0..gazetteer.len())
        .filter(|&i| gazetteer[i].address_type == AddressType::Residential)
        .collect();
    let commercial: Vec<usize> = (0..gazetteer.len())
        .filter(|&i| gazetteer[i].address_type == AddressType::Commercial)
        .collect();

    let end = cfg
        .start
        .checked_add_months(Months::new(cfg.months))
        .ok_or_else(|| Error::Parameter("simulation window overflows".into()))?;

    let mut gt = GroundTruth {
        register: PopulationRegister::default(),
        rel: RelationTable::new(),
        homes: BTreeMap::new(),
        y_values: BTreeMap::new(),
        non_person_accounts: BTreeSet::new(),
        bot_accounts: BTreeSet::new(),
    };
    let mut geo_posts = Vec::new();
    let mut sentiment_posts = Vec::new();
    let (mut n_accounts, mut n_geo, mut n_sent) = (0usize, 0usize, 0usize);

    for u in 0..cfg.n_users {
        let user = UserId(format!("user{u:06}"));
        let is_person = !bernoulli(&mut rng, cfg.non_person_fraction);
        let y = draw_y(cfg, &mut rng);
        gt.y_values.insert(user.clone(), y);
        let base = if is_person {
            gt.register.members.insert(user.clone());
            residential[rng.random_range(0..residential.len())]
        } else {
            commercial[rng.random_range(0..commercial.len())]
        };
        if is_person && bernoulli(&mut rng, cfg.offline_fraction) {
            continue;
        }

        for _ in 0..cfg.accounts_per_user.sample(&mut rng) {
            let account = AccountId(format!("acct{n_accounts:07}"));
            n_accounts += 1;
            gt.rel.link_account(account.clone(), user.clone())?;
            let is_bot = bernoulli(&mut rng, cfg.bot_fraction);
            if is_bot {
                gt.bot_accounts.insert(account.clone());
            }
            let home = &gazetteer[base];
            if is_person {
                gt.homes.insert(
                    account.clone(),
                    Home {
                        lat: home.lat,
                        lon: home.lon,
                        address_id: home.address_id.clone(),
                    },
                );
            } else {
                gt.non_person_accounts.insert(account.clone());
            }

            let away = (gazetteer.len() > 1).then(|| {
                let mut k = rng.random_range(0..gazetteer.len() - 1);
                if k >= base {
                    k += 1;
                }
                &gazetteer[k]
            });
            for _ in 0..cfg.posts_per_account.sample(&mut rng) {
                let post_id = PostId(format!("geo{n_geo:08}"));
                n_geo += 1;
                let site = match away {
                    Some(a) if bernoulli(&mut rng, cfg.away_fraction) => a,
                    _ => home,
                };
                let (lat, lon) = noisy(&mut rng, site.lat, site.lon, cfg.home_noise_sd);
                let post = GeoPost {
                    post_id: post_id.clone(),
                    account_id: account.clone(),
                    timestamp: uniform_instant(&mut rng, cfg.start, end),
                    lat,
                    lon,
                    source: if rng.random::<f64>() < cfg.broker_share { Source::Broker } else { Source::Api },
                    has_gps: !bernoulli(&mut rng, cfg.no_gps_fraction),
                    country: if bernoulli(&mut rng, cfg.foreign_fraction) {
                        "IE".into()
                    } else {
                        cfg.country.clone()
                    },
                    bot_flag: is_bot && cfg.flag_bots,
                };
                gt.rel.link_post(post_id, account.clone())?;
                if bernoulli(&mut rng, cfg.duplicate_fraction) {
                    let other = match post.source {
                        Source::Api => Source::Broker,
                        Source::Broker => Source::Api,
                    };
                    geo_posts.push(GeoPost { source: other, ..post.clone() });
                }
                geo_posts.push(post);
            }

            for m in 0..cfg.months {
                let from = cfg.start + Months::new(m);
                let to = cfg.start + Months::new(m + 1);
                for _ in 0..cfg.sentiment_posts_per_month.sample(&mut rng) {
                    let post_id = PostId(format!("snt{n_sent:08}"));
                    n_sent += 1;
                    let score = if rng.random::<f64>() < cfg.sentiment_fidelity {
                        y
                    } else {
                        rng.random_range(-1..=1)
                    };
                    gt.rel.link_post(post_id.clone(), account.clone())?;
                    sentiment_posts.push(SentimentPost {
                        post_id,
                        account_id: account.clone(),
                        timestamp: uniform_instant(&mut rng, from, to),
                        sentiment: Sentiment::try_from(score).expect("score in range"),
                    });
                }
            }
        }
    }

    Ok(SimOutput {
        ground_truth: gt,
        gazetteer,
        geo_posts,
        sentiment_posts,
    })
}

/// `100 * mean(y)` over register members.
pub fn true_theta(gt: &GroundTruth) -> Result<f64> {
    if gt.register.is_empty() {
        return Err(Error::DegenerateSeries("empty register".into()));
    }
    let mut sum = 0i64;
    for u in &gt.register.members {
        let y = gt
            .y_values
            .get(u)
            .ok_or_else(|| Error::MissingRelation { kind: "user", id: u.0.clone() })?;
        sum += i64::from(*y);
    }
    Ok(100.0 * sum as f64 / gt.register.len() as f64)
}
