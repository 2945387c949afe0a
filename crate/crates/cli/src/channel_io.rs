//! JSON schema for channels: complex entries as [re, im] pairs.

use qavc_core::channel::Channel;
use qavc_core::qmath::{c, CMatrix};
use qavc_core::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub in_dims: Vec<usize>,
    pub out_dims: Vec<usize>,
    /// Kraus operators, each a row-major matrix of [re, im] entries.
    pub kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

impl ChannelSpec {
    pub fn to_channel(&self) -> Result<Channel> {
        let out_total: usize = self.out_dims.iter().product();
        let in_total: usize = self.in_dims.iter().product();
        let mut kraus = Vec::with_capacity(self.kraus.len());
        for (ki, rows) in self.kraus.iter().enumerate() {
            if rows.len() != out_total || rows.iter().any(|r| r.len() != in_total) {
                return Err(Error::Shape(format!(
                    "Kraus operator {ki} is not {out_total}x{in_total}"
                )));
            }
            let mut m = CMatrix::zeros(out_total, in_total);
            for (i, row) in rows.iter().enumerate() {
                for (j, &[re, im]) in row.iter().enumerate() {
                    m[(i, j)] = c(re, im);
                }
            }
            kraus.push(m);
        }
        Channel::new(self.in_dims.clone(), self.out_dims.clone(), kraus)
    }

    pub fn from_channel(ch: &Channel) -> Self {
        Self {
            in_dims: ch.in_dims().to_vec(),
            out_dims: ch.out_dims().to_vec(),
            kraus: ch
                .kraus()
                .iter()
                .map(|k| {
                    (0..k.nrows())
                        .map(|i| (0..k.ncols()).map(|j| [k[(i, j)].re, k[(i, j)].im]).collect())
                        .collect()
                })
                .collect(),
        }
    }
}
