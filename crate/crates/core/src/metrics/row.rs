use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Stable column order of the metrics CSV.
pub const CSV_HEADER: &str =
    "run_id,seed,task,model,optimizer,alpha,beta,n_mb,n_h,sigma_sq,n_step,mask,gamma,\
frozen_refresh,step,train_loss,eval_mse,value_drift,taylor_cosine,status";

/// Hyperparameters identifying the configuration point of a run.
/// `n_h` is absent for RBF models, `sigma_sq` for MLPs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunTags {
    pub task: String,
    pub model: String,
    pub optimizer: String,
    pub alpha: f64,
    pub beta: f64,
    pub n_mb: usize,
    pub n_h: Option<usize>,
    pub sigma_sq: Option<f64>,
    pub n_step: usize,
    pub mask: String,
    pub gamma: f64,
    pub frozen_refresh: Option<usize>,
}

/// One logged point of one run. Absent metrics are written as empty fields.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub run_id: String,
    pub seed: u64,
    pub tags: RunTags,
    pub step: usize,
    pub train_loss: Option<f64>,
    pub eval_mse: Option<f64>,
    pub value_drift: Option<f64>,
    pub taylor_cosine: Option<f64>,
    /// `ok`, or `diverged` on the final row of an aborted run.
    pub status: String,
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

impl MetricsRow {
    pub fn to_csv_line(&self) -> String {
        let t = &self.tags;
        [
            self.run_id.clone(),
            self.seed.to_string(),
            t.task.clone(),
            t.model.clone(),
            t.optimizer.clone(),
            t.alpha.to_string(),
            t.beta.to_string(),
            t.n_mb.to_string(),
            opt(&t.n_h),
            opt(&t.sigma_sq),
            t.n_step.to_string(),
            t.mask.clone(),
            t.gamma.to_string(),
            opt(&t.frozen_refresh),
            self.step.to_string(),
            opt(&self.train_loss),
            opt(&self.eval_mse),
            opt(&self.value_drift),
            opt(&self.taylor_cosine),
            self.status.clone(),
        ]
        .join(",")
    }

    pub fn parse_csv_line(line: &str) -> std::result::Result<Self, String> {
        let f: Vec<&str> = line.split(',').collect();
        let ncols = CSV_HEADER.split(',').count();
        if f.len() != ncols {
            return Err(format!("expected {ncols} fields, found {}", f.len()));
        }
        fn req<T: std::str::FromStr>(s: &str, name: &str) -> std::result::Result<T, String> {
            s.parse().map_err(|_| format!("bad {name} '{s}'"))
        }
        fn maybe<T: std::str::FromStr>(
            s: &str,
            name: &str,
        ) -> std::result::Result<Option<T>, String> {
            if s.is_empty() {
                Ok(None)
            } else {
                req(s, name).map(Some)
            }
        }
        Ok(MetricsRow {
            run_id: f[0].to_string(),
            seed: req(f[1], "seed")?,
            tags: RunTags {
                task: f[2].to_string(),
                model: f[3].to_string(),
                optimizer: f[4].to_string(),
                alpha: req(f[5], "alpha")?,
                beta: req(f[6], "beta")?,
                n_mb: req(f[7], "n_mb")?,
                n_h: maybe(f[8], "n_h")?,
                sigma_sq: maybe(f[9], "sigma_sq")?,
                n_step: req(f[10], "n_step")?,
                mask: f[11].to_string(),
                gamma: req(f[12], "gamma")?,
                frozen_refresh: maybe(f[13], "frozen_refresh")?,
            },
            step: req(f[14], "step")?,
            train_loss: maybe(f[15], "train_loss")?,
            eval_mse: maybe(f[16], "eval_mse")?,
            value_drift: maybe(f[17], "value_drift")?,
            taylor_cosine: maybe(f[18], "taylor_cosine")?,
            status: f[19].to_string(),
        })
    }

    pub fn write_csv<W: Write>(mut w: W, rows: &[MetricsRow]) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in rows {
            writeln!(w, "{}", r.to_csv_line())?;
        }
        Ok(())
    }

    /// Reads a metrics CSV; `path` is only used in error messages.
    pub fn read_csv<R: BufRead>(r: R, path: &Path) -> Result<Vec<MetricsRow>> {
        let err = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut rows = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if i == 0 {
                if line.trim_end() != CSV_HEADER {
                    return Err(err(1, "unexpected header".into()));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            rows.push(MetricsRow::parse_csv_line(line.trim_end()).map_err(|m| err(i + 1, m))?);
        }
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row() -> MetricsRow {
        MetricsRow {
            run_id: "abc123".into(),
            seed: 4,
            tags: RunTags {
                task: "mountain_car_replay".into(),
                model: "mlp".into(),
                optimizer: "corrected".into(),
                alpha: 0.1,
                beta: 0.9,
                n_mb: 16,
                n_h: Some(16),
                sigma_sq: None,
                n_step: 1,
                mask: "layers:0+2".into(),
                gamma: 0.99,
                frozen_refresh: None,
            },
            step: 50,
            train_loss: Some(0.125),
            eval_mse: None,
            value_drift: Some(1e-7),
            taylor_cosine: Some(-0.3),
            status: "ok".into(),
        }
    }

    #[test]
    fn absent_values_are_empty_fields() {
        let line = row().to_csv_line();
        assert_eq!(
            line,
            "abc123,4,mountain_car_replay,mlp,corrected,0.1,0.9,16,16,,1,layers:0+2,0.99,,50,0.125,,0.0000001,-0.3,ok"
        );
        assert_eq!(line.split(',').count(), CSV_HEADER.split(',').count());
    }

    #[test]
    fn file_round_trip() {
        let rows = vec![row(), MetricsRow { step: 100, ..row() }];
        let mut buf = Vec::new();
        MetricsRow::write_csv(&mut buf, &rows).unwrap();
        let back = MetricsRow::read_csv(&buf[..], Path::new("mem")).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn bad_line_reports_location() {
        let text = format!("{CSV_HEADER}\n{}\nnot,a,row\n", row().to_csv_line());
        match MetricsRow::read_csv(text.as_bytes(), Path::new("m.csv")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn metric_values_round_trip(loss in prop::option::of(any::<f64>().prop_filter("finite", |x| x.is_finite())),
                                    cos in prop::option::of(-1.0f64..1.0), alpha in 1e-6f64..1.0) {
            let mut r = row();
            r.train_loss = loss;
            r.taylor_cosine = cos;
            r.tags.alpha = alpha;
            prop_assert_eq!(MetricsRow::parse_csv_line(&r.to_csv_line()).unwrap(), r);
        }
    }
}
