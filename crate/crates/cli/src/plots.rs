//! Plot scripts for convergence reports. Nothing is rendered here; each
//! script reads the report's CSV (or its JSON when the CSV is absent) and
//! draws with matplotlib.

use crate::error::CliError;
use crate::manifest::io_err;
use std::fs;
use std::path::{Path, PathBuf};
use tubelab::lab::ConvergenceReport;
use tubelab::LabError;

/// Writes `plot_<stem>.py` next to every report and returns the paths.
pub fn emit_plots(reports: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::with_capacity(reports.len());
    for path in reports {
        if !path.is_file() {
            return Err(LabError::ReportNotFound(path.display().to_string()).into());
        }
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let report: ConvergenceReport = serde_json::from_str(&text)?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
        let script = plot_script(&report, stem);
        let target = path.with_file_name(format!("plot_{stem}.py"));
        fs::write(&target, script).map_err(io_err(&target))?;
        out.push(target);
    }
    Ok(out)
}

/// Exponent of the guide line recorded in a script, if any.
pub fn guide_slope(script: &str) -> Option<f64> {
    script
        .lines()
        .find_map(|l| l.strip_prefix("GUIDE_SLOPE = "))
        .and_then(|v| v.trim().parse().ok())
}

fn py_float(v: Option<f64>) -> String {
    match v {
        Some(s) if s.is_finite() => format!("{s:?}"),
        _ => "None".into(),
    }
}

pub fn plot_script(report: &ConvergenceReport, stem: &str) -> String {
    let tag = report.theorem_tag.as_str();
    let spectrum = report.series.contains_key("lowest") && report.series.contains_key("limit");
    let mut s = String::new();
    s.push_str("#!/usr/bin/env python3\n");
    s.push_str(&format!("# Distances of the {tag} report against epsilon, log-log.\n"));
    s.push_str("import csv\nimport json\nimport math\nimport os\n\n");
    s.push_str("import matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\n");
    s.push_str("HERE = os.path.dirname(os.path.abspath(__file__))\n");
    s.push_str(&format!("CSV = os.path.join(HERE, \"{stem}.csv\")\n"));
    s.push_str(&format!("JSON = os.path.join(HERE, \"{stem}.json\")\n"));
    s.push_str(&format!("TAG = \"{tag}\"\n"));
    s.push_str(&format!("GUIDE_SLOPE = {}\n", py_float(report.theoretical_slope)));
    s.push_str(&format!("SPECTRUM = {}\n", if spectrum { "True" } else { "False" }));
    s.push_str(
        r#"

def number(text):
    return float(text) if text else math.nan


def load():
    if os.path.exists(CSV):
        with open(CSV, newline="") as f:
            rows = list(csv.DictReader(f))
        return {k: [number(r[k]) for r in rows] for k in rows[0]}
    with open(JSON) as f:
        rep = json.load(f)
    cols = {"epsilon": rep["ladder"], "distance": rep["distances"]}
    for k, v in rep["series"].items():
        if len(v) == len(rep["ladder"]):
            cols[k] = v
    return cols


def main():
    cols = load()
    eps = cols["epsilon"]
    dist = cols["distance"]
    pts = [(e, d) for e, d in zip(eps, dist) if d > 0]
    fig, ax = plt.subplots()
    ax.loglog([p[0] for p in pts], [p[1] for p in pts], "o-", label="measured")
    if GUIDE_SLOPE is not None and pts:
        e0, d0 = pts[0]
        guide = [d0 * (e / e0) ** GUIDE_SLOPE for e, _ in pts]
        ax.loglog([p[0] for p in pts], guide, "--", label="slope %.3g" % GUIDE_SLOPE)
    ax.set_xlabel("epsilon")
    ax.set_ylabel("distance")
    ax.set_title(TAG)
    ax.legend()
    fig.savefig(os.path.join(HERE, "plot_" + os.path.basename(JSON)[:-5] + ".png"), dpi=150)

    if SPECTRUM:
        fig, ax = plt.subplots()
        ax.semilogx(eps, cols["lowest"], "o-", label="lowest eigenvalue")
        ax.axhline(cols["limit"][0], color="k", linestyle=":", label="limit operator")
        if "lowest_odd" in cols:
            ax.semilogx(eps, cols["lowest_odd"], "s-", label="lowest odd eigenvalue")
        ax.set_xlabel("epsilon")
        ax.set_ylabel("eigenvalue")
        ax.set_title(TAG + " spectrum")
        ax.legend()
        fig.savefig(os.path.join(HERE, "plot_" + os.path.basename(JSON)[:-5] + "_spectrum.png"), dpi=150)


if __name__ == "__main__":
    main()
"#,
    );
    s
}

/// Report paths of a run directory, sorted.
pub fn reports_in(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .into_iter()
        .flatten()
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with("report.json")))
        .collect();
    v.sort();
    v
}
