use std::io::Write;

use serde::Serialize;

use super::FloquetSpectrum;
use crate::error::Result;
use crate::linalg;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SpectrumRow {
    pub re_q: f64,
    pub im_q: f64,
    pub modulus: f64,
    pub class: &'static str,
    pub trace_re: f64,
    pub trace_im: f64,
    pub cluster_id: usize,
    pub algebraic_mult: usize,
    pub geometric_mult: usize,
}

impl FloquetSpectrum {
    pub fn rows(&self) -> Vec<SpectrumRow> {
        (0..self.len())
            .map(|j| {
                let q = self.eigenvalues[j];
                let tr = linalg::trace(&self.eigenoperators[j]);
                let c = self.cluster(j);
                SpectrumRow {
                    re_q: q.re,
                    im_q: q.im,
                    modulus: q.norm(),
                    class: self.classes[j].as_str(),
                    trace_re: tr.re,
                    trace_im: tr.im,
                    cluster_id: c.id,
                    algebraic_mult: c.algebraic,
                    geometric_mult: c.geometric,
                }
            })
            .collect()
    }
}

pub fn write_spectrum_csv<W: Write>(spectrum: &FloquetSpectrum, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in spectrum.rows() {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;
    use crate::model::{Jump, LindbladModel};
    use crate::propagator::{floquet_operator, PropagatorConfig};
    use crate::spectral::decompose;
    use crate::superop::elementary;

    #[test]
    fn header_and_rows() {
        let m = LindbladModel::constant(CMatrix::zeros(2, 2), vec![Jump::new(elementary(2, 0, 1), 1.0)], 1.0).unwrap();
        let s = decompose(&floquet_operator(&m, &PropagatorConfig::default()).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "re_q,im_q,modulus,class,trace_re,trace_im,cluster_id,algebraic_mult,geometric_mult"
        );
        let first = lines.next().unwrap();
        assert!(first.starts_with("1") && first.contains(",steady,"), "{first}");
        assert_eq!(text.lines().count(), 5);
    }
}
