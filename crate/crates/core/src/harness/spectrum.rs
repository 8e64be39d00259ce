//! Transform-domain singular value spectra for comparing transforms.

use std::fmt::Write as _;

use crate::error::Result;
use crate::tensor::Tensor3;
use crate::transform::{OrthoTransform, TransformKind};
use crate::tsvd::transform_spectrum;

/// Per-slice singular values (descending) of one tensor under one transform.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumDump {
    pub kind: TransformKind,
    pub spectrum: Vec<Vec<f64>>,
}

impl SpectrumDump {
    pub fn concentration(&self, m: usize) -> f64 {
        concentration(&self.spectrum, m)
    }
}

/// Spectra of `x` under each transform kind, in the order given.
pub fn spectrum_dump(x: &Tensor3, kinds: &[TransformKind]) -> Result<Vec<SpectrumDump>> {
    kinds
        .iter()
        .map(|&kind| {
            let t = OrthoTransform::for_data(kind, x)?;
            Ok(SpectrumDump {
                kind,
                spectrum: transform_spectrum(x, &t)?,
            })
        })
        .collect()
}

/// Share of the total squared singular value mass held by the `m` largest
/// singular values taken over all slices. Zero spectra give 0.
pub fn concentration(spectrum: &[Vec<f64>], m: usize) -> f64 {
    let mut sq: Vec<f64> = spectrum.iter().flatten().map(|s| s * s).collect();
    let total: f64 = sq.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    sq.sort_by(|a, b| b.total_cmp(a));
    sq.iter().take(m).sum::<f64>() / total
}

/// Long-format CSV: one row per singular value.
pub fn format_spectrum(dumps: &[SpectrumDump]) -> String {
    let mut out = String::from("# tbtlrr-spectrum v1\ntransform,slice,index,sigma\n");
    for d in dumps {
        for (k, slice) in d.spectrum.iter().enumerate() {
            for (i, s) in slice.iter().enumerate() {
                let _ = writeln!(out, "{},{},{},{:e}", d.kind, k + 1, i + 1, s);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concentration_values() {
        let sp = vec![vec![3.0, 1.0], vec![2.0, 0.0]];
        assert_eq!(concentration(&sp, 0), 0.0);
        assert!((concentration(&sp, 1) - 9.0 / 14.0).abs() < 1e-15);
        assert!((concentration(&sp, 2) - 13.0 / 14.0).abs() < 1e-15);
        assert_eq!(concentration(&sp, 10), 1.0);
        assert_eq!(concentration(&[vec![0.0]], 1), 0.0);
    }

    #[test]
    fn dump_rows() {
        let x = Tensor3::identity_slices(2, 2);
        let d = spectrum_dump(&x, &[TransformKind::Identity, TransformKind::Dct]).unwrap();
        let text = format_spectrum(&d);
        assert_eq!(text.lines().count(), 2 + 2 * 4);
        assert!(text.contains("identity,1,1,1e0"));
    }
}
