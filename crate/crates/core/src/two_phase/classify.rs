use std::collections::BTreeSet;
use std::path::Path;

use super::{geo, AddressType, Cluster, GazetteerEntry, SpanLabel};
use crate::error::{Error, Result};

/// Clusters spanning fewer days than this are short-term.
pub const SHORT_TERM_DAYS: f64 = 31.0;

/// Address register searched by nearest neighbour.
#[derive(Clone, Debug)]
pub struct Gazetteer {
    // sorted by latitude
    entries: Vec<GazetteerEntry>,
}

impl Gazetteer {
    pub fn new(entries: Vec<GazetteerEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Config("empty gazetteer".into()));
        }
        let mut seen = BTreeSet::new();
        for e in &entries {
            if !geo::valid_coordinates(e.lat, e.lon) {
                return Err(Error::Config(format!("address {} has invalid coordinates", e.address_id)));
            }
            if !seen.insert(e.address_id.as_str()) {
                return Err(Error::Config(format!("duplicate address id {}", e.address_id)));
            }
        }
        let mut entries = entries;
        entries.sort_by(|a, b| a.lat.total_cmp(&b.lat).then_with(|| a.address_id.cmp(&b.address_id)));
        Ok(Self { entries })
    }

    /// Reads `address_id,lat,lon,address_type`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        #[derive(serde::Deserialize)]
        struct Row {
            address_id: String,
            lat: f64,
            lon: f64,
            address_type: String,
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let mut entries = Vec::new();
        for (i, row) in rdr.deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| Error::parse(path, format!("line {}: {e}", i + 2)))?;
            let address_type = row
                .address_type
                .parse::<AddressType>()
                .map_err(|e| Error::parse(path, format!("line {}: {e}", i + 2)))?;
            entries.push(GazetteerEntry {
                address_id: row.address_id,
                lat: row.lat,
                lon: row.lon,
                address_type,
            });
        }
        Self::new(entries)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["address_id", "lat", "lon", "address_type"])?;
        let mut sorted: Vec<&GazetteerEntry> = self.entries.iter().collect();
        sorted.sort_by(|a, b| a.address_id.cmp(&b.address_id));
        for e in sorted {
            w.write_record([
                e.address_id.clone(),
                e.lat.to_string(),
                e.lon.to_string(),
                e.address_type.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn entries(&self) -> &[GazetteerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Nearest entry by great-circle distance; ties go to the smallest id.
    ///
    /// Scans outward from the query latitude and stops once the latitude gap
    /// alone exceeds the best distance found.
    pub fn nearest(&self, lat: f64, lon: f64) -> &GazetteerEntry {
        let start = self.entries.partition_point(|e| e.lat < lat);
        let mut best: Option<(f64, &GazetteerEntry)> = None;
        let better = |d: f64, e: &GazetteerEntry, best: &Option<(f64, &GazetteerEntry)>| match best {
            None => true,
            Some((bd, be)) => d < *bd || (d == *bd && e.address_id < be.address_id),
        };
        let gap = |e: &GazetteerEntry| geo::EARTH_RADIUS_M * (e.lat - lat).abs().to_radians();

        let (mut up, mut down) = (start, start);
        loop {
            let mut progressed = false;
            if up < self.entries.len() {
                let e = &self.entries[up];
                if best.is_none_or(|(bd, _)| gap(e) <= bd) {
                    let d = geo::haversine_m(lat, lon, e.lat, e.lon);
                    if better(d, e, &best) {
                        best = Some((d, e));
                    }
                    up += 1;
                    progressed = true;
                } else {
                    up = self.entries.len();
                }
            }
            if down > 0 {
                let e = &self.entries[down - 1];
                if best.is_none_or(|(bd, _)| gap(e) <= bd) {
                    let d = geo::haversine_m(lat, lon, e.lat, e.lon);
                    if better(d, e, &best) {
                        best = Some((d, e));
                    }
                    down -= 1;
                    progressed = true;
                } else {
                    down = 0;
                }
            }
            if !progressed {
                break;
            }
        }
        best.expect("gazetteer is non-empty").1
    }
}

/// Copies the address type (and id) of the gazetteer entry nearest the
/// cluster centroid. The centroid is the unweighted mean of member
/// coordinates, fixed when the cluster is built.
pub fn classify_cluster(mut cluster: Cluster, gazetteer: &Gazetteer) -> Result<Cluster> {
    if cluster.is_empty() {
        return Err(Error::Parameter("cannot classify an empty cluster".into()));
    }
    let hit = gazetteer.nearest(cluster.centroid.lat, cluster.centroid.lon);
    cluster.address_type = Some(hit.address_type);
    cluster.address_id = Some(hit.address_id.clone());
    Ok(cluster)
}

/// Marks and returns the dominant residential cluster: the valid
/// residential cluster with the most posts, ties broken by earliest first
/// post and then smallest member id.
pub fn select_dominant(clusters: &mut [Cluster]) -> Option<&Cluster> {
    let mut best: Option<usize> = None;
    for (i, c) in clusters.iter().enumerate() {
        if !c.valid || c.address_type != Some(AddressType::Residential) {
            continue;
        }
        let wins = match best {
            None => true,
            Some(b) => {
                let cur = &clusters[b];
                c.len()
                    .cmp(&cur.len())
                    .then(cur.first_timestamp.cmp(&c.first_timestamp))
                    .then_with(|| cur.member_post_ids[0].cmp(&c.member_post_ids[0]))
                    .is_gt()
            }
        };
        if wins {
            best = Some(i);
        }
    }
    for (i, c) in clusters.iter_mut().enumerate() {
        c.dominant = Some(i) == best;
    }
    best.map(|i| &clusters[i])
}

pub fn label_span(mut cluster: Cluster) -> Cluster {
    cluster.span_label = Some(if cluster.span_days < SHORT_TERM_DAYS {
        SpanLabel::ShortTerm
    } else {
        SpanLabel::LongTerm
    });
    cluster
}
