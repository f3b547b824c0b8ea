//! Synthetic connection-record generator behind `gen-data` and the demo
//! walkthrough.
//!
//! Rows follow the classic 41-column connection-record layout: 38 numeric
//! columns plus the `protocol_type`, `service`, and `flag` categoricals.
//! The label column carries a per-attack token (`neptune`, `smurf`, ...)
//! with `normal` for benign traffic, so a loaded copy normalizes every
//! non-`normal` token to malicious.
//!
//! The population is a fixed mixture, sized so the four packaged
//! classifier families come out in a realistic spread instead of all
//! saturating:
//!
//! * Signature traffic (roughly 89%): benign sessions plus six attack
//!   types, each with a crisp fingerprint on a few columns. Every family
//!   handles these.
//! * An `ftp_data` pocket (11%) whose label depends on the two
//!   read-error columns jointly; each column alone says very little.
//!   Trees isolate the pocket and resolve the pair, while a single
//!   hyperplane or per-column likelihoods can only play the weak
//!   marginals.
//! * Authorized scans: a slice of the SYN-flood traffic is maintenance
//!   scanning and benign, distinguishable only by its established login
//!   session. A tree splits the flood fingerprint on `logged_in` and a
//!   separating plane can afford the one extra weight, but summed
//!   per-column evidence never lets a lone quiet column overrule a
//!   whole row of flood context.
//! * A password-guessing band (1.2%) where the chance of an actual
//!   attack ramps with `num_failed_logins`. The band is irreducibly
//!   stochastic, so every model carries a floor of error here and any
//!   boundary fitted through it is somewhat arbitrary.
//! * Uniform label noise (0.15%): tokens flipped after assembly. A lone
//!   tree chases part of this during training; bootstrap averaging
//!   mostly ignores it.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use rand::Rng;

use crate::data::{Column, ColumnKind, Dataset, FeatureValue, FeatureVector, Label, Schema};
use crate::error::Result;
use crate::rng::{self, Purpose};
use crate::scalar::Scalar;

/// Feature columns in file order; the trailing label column is separate.
pub const COLUMN_COUNT: usize = 41;

const K_NUM: ColumnKind = ColumnKind::Continuous;
const K_CAT: ColumnKind = ColumnKind::Categorical;

const COLUMNS: [(&str, ColumnKind); COLUMN_COUNT] = [
    ("duration", K_NUM),
    ("protocol_type", K_CAT),
    ("service", K_CAT),
    ("flag", K_CAT),
    ("src_bytes", K_NUM),
    ("dst_bytes", K_NUM),
    ("land", K_NUM),
    ("wrong_fragment", K_NUM),
    ("urgent", K_NUM),
    ("hot", K_NUM),
    ("num_failed_logins", K_NUM),
    ("logged_in", K_NUM),
    ("num_compromised", K_NUM),
    ("root_shell", K_NUM),
    ("su_attempted", K_NUM),
    ("num_root", K_NUM),
    ("num_file_creations", K_NUM),
    ("num_shells", K_NUM),
    ("num_access_files", K_NUM),
    ("num_outbound_cmds", K_NUM),
    ("is_host_login", K_NUM),
    ("is_guest_login", K_NUM),
    ("count", K_NUM),
    ("srv_count", K_NUM),
    ("serror_rate", K_NUM),
    ("srv_serror_rate", K_NUM),
    ("rerror_rate", K_NUM),
    ("srv_rerror_rate", K_NUM),
    ("same_srv_rate", K_NUM),
    ("diff_srv_rate", K_NUM),
    ("srv_diff_host_rate", K_NUM),
    ("dst_host_count", K_NUM),
    ("dst_host_srv_count", K_NUM),
    ("dst_host_same_srv_rate", K_NUM),
    ("dst_host_diff_srv_rate", K_NUM),
    ("dst_host_same_src_port_rate", K_NUM),
    ("dst_host_srv_diff_host_rate", K_NUM),
    ("dst_host_serror_rate", K_NUM),
    ("dst_host_srv_serror_rate", K_NUM),
    ("dst_host_rerror_rate", K_NUM),
    ("dst_host_srv_rerror_rate", K_NUM),
];

/// Indices into [`COLUMNS`]; only the columns the generator steers get one.
mod col {
    pub const DURATION: usize = 0;
    pub const PROTOCOL_TYPE: usize = 1;
    pub const SERVICE: usize = 2;
    pub const FLAG: usize = 3;
    pub const SRC_BYTES: usize = 4;
    pub const DST_BYTES: usize = 5;
    pub const HOT: usize = 9;
    pub const NUM_FAILED_LOGINS: usize = 10;
    pub const LOGGED_IN: usize = 11;
    pub const ROOT_SHELL: usize = 13;
    pub const NUM_FILE_CREATIONS: usize = 16;
    pub const NUM_ACCESS_FILES: usize = 18;
    pub const IS_GUEST_LOGIN: usize = 21;
    pub const COUNT: usize = 22;
    pub const SRV_COUNT: usize = 23;
    pub const SERROR_RATE: usize = 24;
    pub const SRV_SERROR_RATE: usize = 25;
    pub const RERROR_RATE: usize = 26;
    pub const SRV_RERROR_RATE: usize = 27;
    pub const SAME_SRV_RATE: usize = 28;
    pub const DIFF_SRV_RATE: usize = 29;
    pub const SRV_DIFF_HOST_RATE: usize = 30;
    pub const DST_HOST_COUNT: usize = 31;
    pub const DST_HOST_SRV_COUNT: usize = 32;
    pub const DST_HOST_SAME_SRV_RATE: usize = 33;
    pub const DST_HOST_DIFF_SRV_RATE: usize = 34;
    pub const DST_HOST_SAME_SRC_PORT_RATE: usize = 35;
    pub const DST_HOST_SRV_DIFF_HOST_RATE: usize = 36;
    pub const DST_HOST_SERROR_RATE: usize = 37;
    pub const DST_HOST_SRV_SERROR_RATE: usize = 38;
    pub const DST_HOST_RERROR_RATE: usize = 39;
    pub const DST_HOST_SRV_RERROR_RATE: usize = 40;
}

const BENIGN_TOKEN: &str = "normal";

/// Mixture weights. The pocket and band draws partition rows first; the
/// attack share applies inside the signature segment only.
const SEG_POCKET: f64 = 0.11;
const SEG_BAND: f64 = 0.012;
const ATTACK_SHARE: f64 = 0.5425;
const LABEL_NOISE: f64 = 0.0015;
/// Share of flood-profile rows that are authorized maintenance scans.
const AUTHORIZED_SCAN: f64 = 0.30;
/// root_shell background rates; both classes need nonzero variance or a
/// near-constant column turns into a spurious certainty under Gaussian
/// likelihoods.
const BENIGN_ROOT_SHELL: f64 = 0.003;
const ATTACK_ROOT_SHELL: f64 = 0.04;

/// One record under construction. Numeric cells live in `num`; the three
/// categorical slots are tracked separately and merged on assembly.
struct Row {
    num: [f64; COLUMN_COUNT],
    protocol: &'static str,
    service: &'static str,
    flag: &'static str,
}

struct Sampler {
    rng: ChaCha12Rng,
}

impl Sampler {
    fn new(seed: u64) -> Self {
        Sampler {
            rng: rng::stream(seed, Purpose::Synthesis, 0),
        }
    }

    fn norm(&mut self, mean: f64, sd: f64) -> f64 {
        Normal::new(mean, sd).expect("finite distribution parameters").sample(&mut self.rng)
    }

    /// Nonnegative integer quantity (bytes, connection counts, seconds).
    fn amount(&mut self, mean: f64, sd: f64) -> f64 {
        self.norm(mean, sd).max(0.0).round()
    }

    /// A rate in [0, 1], kept to two decimals like real flow summaries.
    fn rate(&mut self, mean: f64, sd: f64) -> f64 {
        (self.norm(mean, sd).clamp(0.0, 1.0) * 100.0).round() / 100.0
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen::<f64>() < p
    }

    fn pick<T: Copy>(&mut self, table: &[(T, f64)]) -> T {
        let mut u = self.rng.gen::<f64>();
        for &(item, weight) in table {
            if u < weight {
                return item;
            }
            u -= weight;
        }
        table[table.len() - 1].0
    }

    /// The five volume counters move together: an ordinary session sits
    /// low on all of them, an elevated one high on all of them.
    fn set_load(&mut self, r: &mut Row, heavy: bool) {
        if heavy {
            r.num[col::COUNT] = self.amount(160.0, 35.0);
            r.num[col::SRV_COUNT] = self.amount(150.0, 35.0);
            r.num[col::DST_HOST_COUNT] = self.amount(230.0, 30.0);
            r.num[col::DST_HOST_SRV_COUNT] = self.amount(210.0, 35.0);
            r.num[col::DST_HOST_SAME_SRC_PORT_RATE] = self.rate(0.85, 0.07);
        } else {
            r.num[col::COUNT] = self.amount(12.0, 6.0);
            r.num[col::SRV_COUNT] = self.amount(10.0, 5.0);
            r.num[col::DST_HOST_COUNT] = self.amount(32.0, 14.0);
            r.num[col::DST_HOST_SRV_COUNT] = self.amount(26.0, 12.0);
            r.num[col::DST_HOST_SAME_SRC_PORT_RATE] = self.rate(0.08, 0.05);
        }
    }

    /// Ordinary benign session. Attack builders start from this and
    /// overwrite their fingerprint columns.
    fn base_row(&mut self) -> Row {
        let mut r = Row {
            num: [0.0; COLUMN_COUNT],
            protocol: "tcp",
            service: "http",
            flag: "SF",
        };
        r.protocol = self.pick(&[("tcp", 0.70), ("udp", 0.27), ("icmp", 0.03)]);
        if r.protocol == "icmp" {
            r.service = self.pick(&[("eco_i", 0.5), ("ecr_i", 0.5)]);
            r.num[col::SRC_BYTES] = self.amount(30.0, 10.0);
        } else {
            r.service = self.pick(&[
                ("http", 0.55),
                ("smtp", 0.18),
                ("domain_u", 0.17),
                ("telnet", 0.05),
                ("ftp", 0.05),
            ]);
            r.num[col::SRC_BYTES] = self.amount(300.0, 110.0);
            r.num[col::DST_BYTES] = self.amount(2400.0, 900.0);
            r.num[col::LOGGED_IN] = f64::from(self.chance(0.78));
        }
        r.flag = self.pick(&[("SF", 0.93), ("REJ", 0.04), ("RSTR", 0.02), ("S0", 0.01)]);
        r.num[col::DURATION] = self.amount(10.0, 8.0);
        // Texture columns share one distribution across classes; they
        // carry no signal but keep every variance away from the floor.
        if self.chance(0.07) {
            r.num[col::HOT] = self.amount(2.0, 1.0).max(1.0);
        }
        if self.chance(0.01) {
            r.num[col::NUM_FAILED_LOGINS] = 1.0;
        }
        if self.chance(0.10) {
            r.num[col::NUM_FILE_CREATIONS] = self.amount(1.5, 0.8).max(1.0);
        }
        if self.chance(0.05) {
            r.num[col::NUM_ACCESS_FILES] = 1.0;
        }
        r.num[col::IS_GUEST_LOGIN] = f64::from(self.chance(0.03));
        r.num[col::ROOT_SHELL] = f64::from(self.chance(BENIGN_ROOT_SHELL));
        self.set_load(&mut r, false);
        r.num[col::SERROR_RATE] = self.rate(0.02, 0.02);
        r.num[col::SRV_SERROR_RATE] = self.rate(0.02, 0.02);
        r.num[col::DST_HOST_SERROR_RATE] = self.rate(0.02, 0.02);
        r.num[col::DST_HOST_SRV_SERROR_RATE] = self.rate(0.02, 0.02);
        r.num[col::RERROR_RATE] = self.rate(0.02, 0.02);
        r.num[col::SRV_RERROR_RATE] = self.rate(0.02, 0.02);
        r.num[col::DST_HOST_RERROR_RATE] = self.rate(0.03, 0.03);
        r.num[col::DST_HOST_SRV_RERROR_RATE] = self.rate(0.03, 0.03);
        r.num[col::SAME_SRV_RATE] = self.rate(0.88, 0.07);
        r.num[col::DIFF_SRV_RATE] = self.rate(0.07, 0.05);
        r.num[col::SRV_DIFF_HOST_RATE] = self.rate(0.12, 0.08);
        r.num[col::DST_HOST_SAME_SRV_RATE] = self.rate(0.85, 0.09);
        r.num[col::DST_HOST_DIFF_SRV_RATE] = self.rate(0.06, 0.05);
        r.num[col::DST_HOST_SRV_DIFF_HOST_RATE] = self.rate(0.05, 0.04);
        r
    }

    /// SYN-flood profile. A fixed share of this traffic is authorized
    /// maintenance scanning: identical on every context column, but it
    /// runs inside an established login session and is benign.
    fn flood(&mut self, r: &mut Row) -> &'static str {
        r.protocol = "tcp";
        r.service = "private";
        r.flag = "S0";
        r.num[col::DURATION] = 0.0;
        r.num[col::SRC_BYTES] = 0.0;
        r.num[col::DST_BYTES] = 0.0;
        r.num[col::SERROR_RATE] = self.rate(0.95, 0.04);
        r.num[col::SRV_SERROR_RATE] = self.rate(0.95, 0.04);
        r.num[col::DST_HOST_SERROR_RATE] = self.rate(0.95, 0.04);
        r.num[col::DST_HOST_SRV_SERROR_RATE] = self.rate(0.95, 0.04);
        r.num[col::SAME_SRV_RATE] = self.rate(0.07, 0.05);
        r.num[col::DST_HOST_SAME_SRV_RATE] = self.rate(0.06, 0.05);
        self.set_load(r, true);
        let authorized = self.chance(AUTHORIZED_SCAN);
        r.num[col::LOGGED_IN] = f64::from(authorized);
        if authorized {
            BENIGN_TOKEN
        } else {
            "neptune"
        }
    }

    fn smurf(&mut self, r: &mut Row) {
        r.protocol = "icmp";
        r.service = "ecr_i";
        r.flag = "SF";
        r.num[col::DURATION] = 0.0;
        r.num[col::SRC_BYTES] = self.amount(1032.0, 35.0);
        r.num[col::DST_BYTES] = 0.0;
        r.num[col::LOGGED_IN] = 0.0;
        self.set_load(r, true);
    }

    fn back(&mut self, r: &mut Row) {
        r.protocol = "tcp";
        r.service = "http";
        r.flag = "SF";
        r.num[col::DURATION] = self.amount(2.0, 2.0);
        r.num[col::SRC_BYTES] = self.amount(54000.0, 5000.0);
        r.num[col::DST_BYTES] = self.amount(8000.0, 1800.0);
        r.num[col::LOGGED_IN] = f64::from(self.chance(0.5));
        self.set_load(r, true);
    }

    fn satan(&mut self, r: &mut Row) {
        r.service = self.pick(&[("private", 0.5), ("other", 0.5)]);
        r.flag = "REJ";
        r.num[col::DURATION] = 0.0;
        r.num[col::SRC_BYTES] = self.amount(10.0, 8.0);
        r.num[col::DST_BYTES] = 0.0;
        r.num[col::LOGGED_IN] = 0.0;
        r.num[col::SAME_SRV_RATE] = self.rate(0.20, 0.12);
        r.num[col::DIFF_SRV_RATE] = self.rate(0.55, 0.22);
        r.num[col::DST_HOST_DIFF_SRV_RATE] = self.rate(0.50, 0.20);
        self.set_load(r, true);
    }

    fn portsweep(&mut self, r: &mut Row) {
        r.flag = "REJ";
        r.num[col::DURATION] = self.amount(1.0, 1.0);
        r.num[col::SRC_BYTES] = self.amount(15.0, 10.0);
        r.num[col::DST_BYTES] = 0.0;
        r.num[col::LOGGED_IN] = 0.0;
        r.num[col::SAME_SRV_RATE] = self.rate(0.30, 0.15);
        r.num[col::DIFF_SRV_RATE] = self.rate(0.45, 0.20);
        r.num[col::DST_HOST_DIFF_SRV_RATE] = self.rate(0.45, 0.20);
        self.set_load(r, true);
    }

    fn ipsweep(&mut self, r: &mut Row) {
        r.protocol = "icmp";
        r.service = "eco_i";
        r.flag = "SF";
        r.num[col::DURATION] = 0.0;
        r.num[col::SRC_BYTES] = self.amount(18.0, 6.0);
        r.num[col::DST_BYTES] = 0.0;
        r.num[col::LOGGED_IN] = 0.0;
        r.num[col::SRV_DIFF_HOST_RATE] = self.rate(0.55, 0.18);
        self.set_load(r, true);
    }

    /// The `ftp_data` pocket. Each read-error column is bimodal and the
    /// label is their exclusive-or. Cell weights are deliberately a
    /// little lopsided: with an exactly balanced pocket neither column
    /// has any marginal gain on its own and a greedy tree would stop
    /// before discovering the pair.
    fn pocket(&mut self, r: &mut Row) -> &'static str {
        r.protocol = "udp";
        r.service = "ftp_data";
        r.flag = "SF";
        r.num[col::DURATION] = self.amount(1.0, 1.0);
        r.num[col::SRC_BYTES] = self.amount(28.0, 8.0);
        r.num[col::DST_BYTES] = 0.0;
        r.num[col::LOGGED_IN] = 0.0;
        let (a, b) = self.pick(&[
            ((false, false), 0.36),
            ((false, true), 0.14),
            ((true, false), 0.27),
            ((true, true), 0.23),
        ]);
        r.num[col::RERROR_RATE] = self.rate(if a { 0.95 } else { 0.05 }, 0.02);
        r.num[col::SRV_RERROR_RATE] = self.rate(if b { 0.95 } else { 0.05 }, 0.02);
        if a ^ b {
            "teardrop"
        } else {
            BENIGN_TOKEN
        }
    }

    /// The password-guessing band. The failed-login count is uniform and
    /// the attack probability ramps with it, so the band never separates
    /// cleanly no matter the model.
    fn band(&mut self, r: &mut Row) -> &'static str {
        let failures = f64::from(self.rng.gen_range(0u32..9));
        r.num[col::NUM_FAILED_LOGINS] = failures;
        r.num[col::LOGGED_IN] = 0.0;
        if self.chance(failures / 8.0) {
            "guess_passwd"
        } else {
            BENIGN_TOKEN
        }
    }

    fn row(&mut self) -> (Row, &'static str) {
        let mut r = self.base_row();
        let seg = self.rng.gen::<f64>();
        let mut token = if seg < SEG_POCKET {
            self.pocket(&mut r)
        } else if seg < SEG_POCKET + SEG_BAND {
            self.band(&mut r)
        } else if self.chance(ATTACK_SHARE) {
            let kind = self.pick(&[
                ("neptune", 0.40),
                ("smurf", 0.30),
                ("back", 0.10),
                ("satan", 0.10),
                ("portsweep", 0.05),
                ("ipsweep", 0.05),
            ]);
            // Context columns, root_shell included, follow the attack
            // profile either way; only the flood's login veto decides
            // its label.
            r.num[col::ROOT_SHELL] = f64::from(self.chance(ATTACK_ROOT_SHELL));
            match kind {
                "neptune" => self.flood(&mut r),
                "smurf" => {
                    self.smurf(&mut r);
                    kind
                }
                "back" => {
                    self.back(&mut r);
                    kind
                }
                "satan" => {
                    self.satan(&mut r);
                    kind
                }
                "portsweep" => {
                    self.portsweep(&mut r);
                    kind
                }
                _ => {
                    self.ipsweep(&mut r);
                    kind
                }
            }
        } else {
            BENIGN_TOKEN
        };
        if self.chance(LABEL_NOISE) {
            token = if token == BENIGN_TOKEN { "warezclient" } else { BENIGN_TOKEN };
        }
        (r, token)
    }
}

/// The fixed 41-column layout with `label` as the label column and
/// `normal` as the benign token.
pub fn schema() -> Schema {
    let columns = COLUMNS
        .iter()
        .map(|&(name, kind)| Column {
            name: name.to_string(),
            kind,
        })
        .collect();
    Schema::new(columns, "label", BENIGN_TOKEN, "attack").expect("static layout is well formed")
}

fn assemble<F: Scalar>(row: &Row) -> Vec<FeatureValue<F>> {
    (0..COLUMN_COUNT)
        .map(|i| match i {
            col::PROTOCOL_TYPE => FeatureValue::Category(row.protocol.to_string()),
            col::SERVICE => FeatureValue::Category(row.service.to_string()),
            col::FLAG => FeatureValue::Category(row.flag.to_string()),
            _ => FeatureValue::Number(F::from_f64_lossy(row.num[i])),
        })
        .collect()
}

/// Generate `rows` labeled records. The same seed reproduces the same
/// dataset; attack tokens collapse to the binary malicious label.
pub fn dataset<F: Scalar>(rows: usize, seed: u64) -> Dataset<F> {
    let mut sampler = Sampler::new(seed);
    let records = (0..rows)
        .map(|_| {
            let (row, token) = sampler.row();
            let label = if token == BENIGN_TOKEN { Label::Benign } else { Label::Malicious };
            FeatureVector::new(assemble(&row), Some(label))
        })
        .collect();
    Dataset::new(schema(), records, true).expect("generated rows conform to the generator schema")
}

/// Stream the same records to a CSV file, keeping the per-attack label
/// tokens. Loading the file with [`schema`] reproduces [`dataset`] for
/// the same `rows` and `seed` exactly.
pub fn write_csv(path: impl AsRef<Path>, rows: usize, seed: u64) -> Result<()> {
    let mut sampler = Sampler::new(seed);
    let file = fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    let names: Vec<&str> = COLUMNS.iter().map(|&(name, _)| name).collect();
    writeln!(out, "{},label", names.join(","))?;
    let mut line = String::new();
    for _ in 0..rows {
        let (row, token) = sampler.row();
        line.clear();
        for i in 0..COLUMN_COUNT {
            match i {
                col::PROTOCOL_TYPE => line.push_str(row.protocol),
                col::SERVICE => line.push_str(row.service),
                col::FLAG => line.push_str(row.flag),
                _ => line.push_str(&row.num[i].to_string()),
            }
            line.push(',');
        }
        line.push_str(token);
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}
