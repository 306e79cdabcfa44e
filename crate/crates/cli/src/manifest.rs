//! Self-describing headers for output files.
//!
//! Every output starts with `#` lines naming the tool version, the command,
//! the config source, the output set and the fully resolved configuration as
//! TOML. The configuration block can be parsed back with [`parse_resolved`].

use crate::config::Resolved;
use crate::error::CliError;

const CONFIG_BEGIN: &str = "# resolved configuration:";
const CONFIG_END: &str = "# end configuration";

#[derive(Clone, Debug)]
pub struct Manifest {
    pub command: String,
    pub config_source: String,
    pub resolved: Resolved,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn header(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# hpa {}\n", env!("CARGO_PKG_VERSION")));
        out.push_str(&format!("# command: {}\n", self.command));
        out.push_str(&format!("# config: {}\n", self.config_source));
        out.push_str(&format!("# outputs: {}\n", self.outputs.join(" ")));
        out.push_str(CONFIG_BEGIN);
        out.push('\n');
        for line in self.resolved.to_toml().lines() {
            if line.is_empty() {
                out.push_str("#\n");
            } else {
                out.push_str("# ");
                out.push_str(line);
                out.push('\n');
            }
        }
        out.push_str(CONFIG_END);
        out.push('\n');
        out
    }
}

/// Recovers the resolved configuration from a file carrying a manifest.
pub fn parse_resolved(text: &str) -> Result<Resolved, CliError> {
    let mut lines = text.lines().skip_while(|l| *l != CONFIG_BEGIN);
    if lines.next().is_none() {
        return Err(CliError::Config("no manifest configuration block".into()));
    }
    let body: Vec<&str> = lines
        .take_while(|l| *l != CONFIG_END)
        .map(|l| l.strip_prefix("# ").unwrap_or(l.trim_start_matches('#')))
        .collect();
    Resolved::from_toml(&body.join("\n"))
}
