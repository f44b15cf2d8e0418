//! CSV and file helpers.
//!
//! Trajectories are written as `t,x1,...,xM` with one row per step; point
//! clouds as `x_t,x_tminus1,...`. Floats carry 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use crate::abm::MicroState;
use crate::error::{Error, Result};
use crate::henon::PointCloud;
use crate::trajectory::Trajectory;

/// Upper bound on columns accepted by the CSV readers.
pub const MAX_COLUMNS: usize = 1 << 12;

pub fn read_file(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes `contents`, creating parent directories as needed.
pub fn write_file(path: impl AsRef<Path>, contents: &str) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn trajectory_to_csv(traj: &Trajectory) -> String {
    let mut s = String::from("t");
    for j in 1..=traj.dim() {
        let _ = write!(s, ",x{j}");
    }
    s.push('\n');
    for (t, state) in traj.states().enumerate() {
        let _ = write!(s, "{t}");
        for &v in state {
            s.push(',');
            s.push_str(&float(v));
        }
        s.push('\n');
    }
    s
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn record_line(rec: &csv::StringRecord) -> usize {
    rec.position().map_or(0, |p| p.line() as usize)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::parse(line, e.to_string())
}

fn parse_float(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| Error::parse(line, format!("not a number: {field:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite value {field:?}")));
    }
    Ok(v)
}

/// Reads the format of [`trajectory_to_csv`]. The `t` column must count
/// up from 0.
pub fn parse_trajectory_csv(text: &str) -> Result<Trajectory> {
    let mut rdr = csv_reader(text);
    let header = rdr.headers().map_err(csv_error)?.clone();
    if header.is_empty() || &header[0] != "t" {
        return Err(Error::parse(1, "header must start with `t`"));
    }
    let dim = header.len() - 1;
    if dim == 0 || dim > MAX_COLUMNS {
        return Err(Error::parse(1, format!("unsupported number of coordinates: {dim}")));
    }
    for (j, name) in header.iter().skip(1).enumerate() {
        if name != format!("x{}", j + 1) {
            return Err(Error::parse(1, format!("expected column x{}, found {name:?}", j + 1)));
        }
    }
    let mut traj = Trajectory::new(dim);
    let mut state = vec![0.0; dim];
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = record_line(&rec);
        if rec.len() != dim + 1 {
            return Err(Error::parse(line, format!("expected {} fields, found {}", dim + 1, rec.len())));
        }
        let t: usize = rec[0]
            .parse()
            .map_err(|_| Error::parse(line, format!("bad time index {:?}", &rec[0])))?;
        if t != traj.len() {
            return Err(Error::parse(line, format!("expected t = {}, found {t}", traj.len())));
        }
        for (j, slot) in state.iter_mut().enumerate() {
            *slot = parse_float(&rec[j + 1], line)?;
        }
        traj.push(&state)?;
    }
    if traj.is_empty() {
        return Err(Error::parse(1, "trajectory has no rows"));
    }
    Ok(traj)
}

/// `t,a1,...,aN` with 1-based opinions.
pub fn micro_to_csv(states: &[MicroState]) -> String {
    let n = states.first().map_or(0, MicroState::n_agents);
    let mut s = String::from("t");
    for i in 1..=n {
        let _ = write!(s, ",a{i}");
    }
    s.push('\n');
    for (t, state) in states.iter().enumerate() {
        let _ = write!(s, "{t}");
        for &o in state.opinions() {
            let _ = write!(s, ",{}", o + 1);
        }
        s.push('\n');
    }
    s
}

fn cloud_columns(dim: usize) -> Vec<String> {
    (0..dim)
        .map(|k| if k == 0 { "x_t".to_string() } else { format!("x_tminus{k}") })
        .collect()
}

pub fn point_cloud_to_csv(cloud: &PointCloud) -> String {
    let mut s = cloud_columns(cloud.dim()).join(",");
    s.push('\n');
    for p in cloud.points() {
        let row: Vec<String> = p.iter().map(|&v| float(v)).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Reads the format of [`point_cloud_to_csv`].
pub fn parse_point_cloud_csv(text: &str) -> Result<PointCloud> {
    let mut rdr = csv_reader(text);
    let header = rdr.headers().map_err(csv_error)?.clone();
    let dim = header.len();
    if dim == 0 || dim > MAX_COLUMNS {
        return Err(Error::parse(1, format!("unsupported number of columns: {dim}")));
    }
    if header.iter().ne(cloud_columns(dim).iter().map(String::as_str)) {
        return Err(Error::parse(1, format!("expected header {}", cloud_columns(dim).join(","))));
    }
    let mut coords = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = record_line(&rec);
        if rec.len() != dim {
            return Err(Error::parse(line, format!("expected {dim} fields, found {}", rec.len())));
        }
        for f in rec.iter() {
            coords.push(parse_float(f, line)?);
        }
    }
    PointCloud::new(dim, coords)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_round_trip_is_exact() {
        let t = Trajectory::from_states(&[[0.1, 1.0 / 3.0], [f64::MIN_POSITIVE, -2.5e300]]).unwrap();
        let text = trajectory_to_csv(&t);
        assert!(text.starts_with("t,x1,x2\n0,"));
        assert_eq!(parse_trajectory_csv(&text).unwrap(), t);
    }

    #[test]
    fn trajectory_rejects_malformed_input() {
        assert!(parse_trajectory_csv("").is_err());
        assert!(parse_trajectory_csv("t,x1\n").is_err());
        assert!(parse_trajectory_csv("t,y1\n0,1\n").is_err());
        assert!(parse_trajectory_csv("t,x1\n1,0.5\n").is_err());
        assert!(parse_trajectory_csv("t,x1\n0,0.5,3\n").is_err());
        assert!(parse_trajectory_csv("t,x1\n0,NaN\n").is_err());
        let err = parse_trajectory_csv("t,x1\n0,0.5\n1,oops\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn micro_csv_uses_one_based_opinions() {
        let s = MicroState::new(vec![0, 2, 1], 3).unwrap();
        assert_eq!(micro_to_csv(&[s]), "t,a1,a2,a3\n0,1,3,2\n");
    }

    #[test]
    fn point_cloud_round_trip() {
        let c = PointCloud::from_points(&[[1.0, 2.0], [3.0, -0.125]]).unwrap();
        let text = point_cloud_to_csv(&c);
        assert!(text.starts_with("x_t,x_tminus1\n"));
        assert_eq!(parse_point_cloud_csv(&text).unwrap(), c);
        assert!(parse_point_cloud_csv("x_t,x_tminus1\n").is_err());
        assert!(parse_point_cloud_csv("a,b\n1,2\n").is_err());
    }

    #[test]
    fn files_report_their_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/out.csv");
        write_file(&path, "x").unwrap();
        assert_eq!(read_file(&path).unwrap(), "x");
        let missing = dir.path().join("missing.csv");
        match read_file(&missing) {
            Err(Error::Io { path, .. }) => assert_eq!(path, missing),
            other => panic!("{other:?}"),
        }
    }
}
