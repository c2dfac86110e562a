use std::fmt;

pub const AUDIT_HEADER: &str = "experiment,params,statistic,value,bound,pass";

/// One audited statistic next to the bound it is checked against.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    pub experiment: String,
    /// `key=value` pairs separated by `;`.
    pub params: String,
    pub statistic: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl AuditRow {
    pub fn new(experiment: &str, params: &[(&str, f64)], statistic: &str, value: f64, bound: f64, pass: bool) -> Self {
        Self {
            experiment: experiment.to_owned(),
            params: params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";"),
            statistic: statistic.to_owned(),
            value,
            bound,
            pass,
        }
    }
}

impl fmt::Display for AuditRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{:.16e},{:.16e},{}",
            self.experiment, self.params, self.statistic, self.value, self.bound, self.pass
        )
    }
}

pub fn audit_csv(rows: &[AuditRow]) -> String {
    let mut s = String::from(AUDIT_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_string());
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_render_in_header_order() {
        let r = AuditRow::new("hoeffding-tail", &[("nu", 64.0), ("d", 4.0)], "tail_rate", 0.0, 3.35e-4, true);
        let csv = audit_csv(&[r]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(AUDIT_HEADER));
        assert_eq!(lines.next(), Some("hoeffding-tail,nu=64;d=4,tail_rate,0.0000000000000000e0,3.3500000000000001e-4,true"));
    }
}
