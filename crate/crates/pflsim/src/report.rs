//! CSV assembly: every file carries a provenance comment line and a header
//! row; all real numbers are emitted with 10 significant digits.

use crate::config::Mode;

#[derive(Clone, Debug)]
pub struct Stamp {
    pub version: &'static str,
    pub mode: Mode,
    pub config_sha256: String,
    pub seed: u64,
}

impl Stamp {
    fn comment(&self) -> String {
        format!(
            "# pflsim {} mode={} config_sha256={} seed={}\n",
            self.version,
            self.mode.as_str(),
            self.config_sha256,
            self.seed
        )
    }
}

pub fn num(v: f64) -> String {
    format!("{v:.9e}")
}

pub struct Csv {
    body: String,
}

impl Csv {
    pub fn new(stamp: &Stamp, header: &str) -> Csv {
        let mut body = stamp.comment();
        body.push_str(header);
        body.push('\n');
        Csv { body }
    }

    pub fn row(&mut self, cells: &[&str]) {
        self.body.push_str(&cells.join(","));
        self.body.push('\n');
    }

    pub fn finish(self) -> String {
        self.body
    }
}

/// A mode's complete output set, assembled in memory and written only after
/// every computation has succeeded.
pub type Files = Vec<(&'static str, String)>;
