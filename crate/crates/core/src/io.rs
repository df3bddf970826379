//! CSV and JSON formats shared by the library and the command line.

use std::io::{Read, Write};

use crate::coupling::CouplingSpec;
use crate::error::{Error, Result};
use crate::model::Trajectory;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `t,q,qdot` followed by one `x@omega` column per sampled mode.
pub fn write_trajectory_csv<W: Write>(tr: &Trajectory, w: W) -> Result<()> {
    tr.validate()?;
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["t".to_string(), "q".into(), "qdot".into()];
    header.extend(tr.modes.iter().map(|m| format!("x@{}", fmt_f64(m.omega))));
    wr.write_record(&header)?;
    for i in 0..tr.len() {
        let mut row = vec![fmt_f64(tr.t[i]), fmt_f64(tr.q[i]), fmt_f64(tr.qdot[i])];
        row.extend(tr.modes.iter().map(|m| fmt_f64(m.values[i])));
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}

fn parse(s: &str, line: usize) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("line {line}: `{s}` is not a number")))
}

/// Reads the format written by [`write_trajectory_csv`].
pub fn read_trajectory_csv<R: Read>(r: R) -> Result<Trajectory> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers()?.clone();
    if header.len() < 3 || &header[0] != "t" || &header[1] != "q" || &header[2] != "qdot" {
        return Err(Error::Parse("trajectory header must start with t,q,qdot".into()));
    }
    let omegas = header
        .iter()
        .skip(3)
        .map(|h| {
            h.strip_prefix("x@").ok_or_else(|| Error::Parse(format!("bad mode column `{h}`"))).and_then(|s| parse(s, 1))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        for (j, field) in rec.iter().enumerate() {
            cols[j].push(parse(field, k + 2)?);
        }
    }
    let mut it = cols.into_iter();
    let (t, q, qdot) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
    let mut tr = Trajectory::new(t, q, qdot)?;
    for (omega, values) in omegas.into_iter().zip(it) {
        tr = tr.with_mode(omega, values)?;
    }
    Ok(tr)
}

/// Reads a two-column `omega,alpha` table into a tabulated coupling.
pub fn read_coupling_csv<R: Read>(r: R) -> Result<CouplingSpec> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers()?.clone();
    if header.len() != 2 || &header[0] != "omega" || &header[1] != "alpha" {
        return Err(Error::Parse("coupling header must be omega,alpha".into()));
    }
    let (mut omega, mut alpha) = (Vec::new(), Vec::new());
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        omega.push(parse(&rec[0], k + 2)?);
        alpha.push(parse(&rec[1], k + 2)?);
    }
    CouplingSpec::tabulated(omega, alpha)
}

/// Writes `omega,alpha` samples.
pub fn write_coupling_csv<W: Write>(omega: &[f64], alpha: &[f64], w: W) -> Result<()> {
    if omega.len() != alpha.len() {
        return Err(Error::GridMismatch(format!("{} frequencies, {} values", omega.len(), alpha.len())));
    }
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["omega", "alpha"])?;
    for (o, a) in omega.iter().zip(alpha) {
        wr.write_record([fmt_f64(*o), fmt_f64(*a)])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn coupling_to_json(c: &CouplingSpec) -> Result<String> {
    Ok(serde_json::to_string_pretty(c)?)
}

pub fn coupling_from_json(s: &str) -> Result<CouplingSpec> {
    let c: CouplingSpec = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    if let crate::coupling::CouplingKind::Tabulated { omega, alpha } = &c.kind {
        CouplingSpec::tabulated(omega.clone(), alpha.clone())?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::OscillatorParams;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn trajectory_round_trip() {
        let tr = Trajectory::new(vec![0.0, 0.5, 1.0], vec![1.0, 0.25, -0.125], vec![0.0, -1.0, 0.5])
            .unwrap()
            .with_mode(2.5, vec![0.1, 0.2, 0.3])
            .unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&tr, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,q,qdot,x@2.5000000000000000e0\n"));
        assert_eq!(read_trajectory_csv(buf.as_slice()).unwrap(), tr);
    }

    #[test]
    fn coupling_table_round_trip_and_rejects_bad_input() {
        let mut buf = Vec::new();
        write_coupling_csv(&[0.0, 1.0, 2.0], &[0.0, 0.5, 0.7], &mut buf).unwrap();
        let c = read_coupling_csv(buf.as_slice()).unwrap();
        assert_eq!(c.alpha(1.0).unwrap(), 0.5);
        assert!(read_coupling_csv("omega,alpha\n1,0\n0.5,0\n".as_bytes()).is_err());
        assert!(read_coupling_csv("w,a\n1,0\n2,0\n".as_bytes()).is_err());
        assert!(read_coupling_csv("omega,alpha\n1,x\n2,0\n".as_bytes()).is_err());
    }

    #[test]
    fn coupling_json_round_trip() {
        let c = CouplingSpec::ohmic(OscillatorParams::new(3.0, 1.0).unwrap()).scaled(0.5);
        assert_eq!(coupling_from_json(&coupling_to_json(&c).unwrap()).unwrap(), c);
    }
}
