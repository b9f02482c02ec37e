use serde::{Deserialize, Serialize};

use super::catalog::{
    axis_tube_derivative, axis_tube_raw, perturbed_value, urysohn_gradient, urysohn_raw,
};
use super::{DenseMatrix, MapEval};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::quantizer::CodecConfig;

/// The outer map `y ↦ matrix·y + offset` of a composite.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub matrix: DenseMatrix,
    pub offset: Vec<f64>,
}

impl Affine {
    pub fn new(matrix: DenseMatrix, offset: Vec<f64>) -> Result<Self> {
        if offset.len() != matrix.rows() {
            return Err(Error::config(format!(
                "affine offset has {} entries, matrix has {} rows",
                offset.len(),
                matrix.rows()
            )));
        }
        if offset.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("affine offset must be finite"));
        }
        Ok(Affine { matrix, offset })
    }

    /// `y ↦ s·y`, as a `dim × dim` affine map.
    pub fn scaling(dim: usize, s: f64) -> Result<Self> {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = s;
        }
        Self::new(DenseMatrix::new(dim, dim, data)?, vec![0.0; dim])
    }

    fn apply(&self, y: &[f64]) -> Vec<f64> {
        self.matrix
            .apply(y)
            .iter()
            .zip(&self.offset)
            .map(|(a, b)| a + b)
            .collect()
    }
}

/// A declarative, serialisable map ℝⁿ → ℝᵐ.
#[derive(Debug, Clone, PartialEq)]
pub enum MapDescriptor {
    /// `x ↦ A·x`, with A of shape m × n.
    Linear { matrix: DenseMatrix },
    /// The two-point map `d(x,a)² / (d(x,a)² + d(x,b)²)`.
    Urysohn { a: Point, b: Point },
    /// `(x₁, ‖(x₂,…,xₙ)‖, 0, …, 0)`.
    AxisTube { n: usize, m: usize },
    /// The discontinuous grid codec, viewed as a real-valued map.
    PrimeQuantizer(CodecConfig),
    /// `A·x + amplitude · sin(W·x + φ)`: a smooth perturbation of a linear map.
    Perturbed {
        matrix: DenseMatrix,
        amplitude: f64,
        frequencies: DenseMatrix,
        phases: Vec<f64>,
    },
    /// An affine map applied after another catalog map.
    Composite {
        outer: Affine,
        inner: Box<MapDescriptor>,
    },
}

impl MapDescriptor {
    pub fn linear(matrix: DenseMatrix) -> Self {
        MapDescriptor::Linear { matrix }
    }

    pub fn urysohn(a: Point, b: Point) -> Result<Self> {
        let d = MapDescriptor::Urysohn { a, b };
        d.validate("")?;
        Ok(d)
    }

    pub fn axis_tube(n: usize, m: usize) -> Result<Self> {
        let d = MapDescriptor::AxisTube { n, m };
        d.validate("")?;
        Ok(d)
    }

    pub fn perturbed(
        matrix: DenseMatrix,
        amplitude: f64,
        frequencies: DenseMatrix,
        phases: Vec<f64>,
    ) -> Result<Self> {
        let d = MapDescriptor::Perturbed {
            matrix,
            amplitude,
            frequencies,
            phases,
        };
        d.validate("")?;
        Ok(d)
    }

    pub fn composite(outer: Affine, inner: MapDescriptor) -> Result<Self> {
        let d = MapDescriptor::Composite {
            outer,
            inner: Box::new(inner),
        };
        d.validate("")?;
        Ok(d)
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            MapDescriptor::Linear { .. } => "linear",
            MapDescriptor::Urysohn { .. } => "urysohn",
            MapDescriptor::AxisTube { .. } => "axis_tube",
            MapDescriptor::PrimeQuantizer(_) => "prime_quantizer",
            MapDescriptor::Perturbed { .. } => "perturbed",
            MapDescriptor::Composite { .. } => "composite",
        }
    }

    fn dims(&self) -> (usize, usize) {
        match self {
            MapDescriptor::Linear { matrix } => (matrix.cols(), matrix.rows()),
            MapDescriptor::Urysohn { a, .. } => (a.dim(), 1),
            MapDescriptor::AxisTube { n, m } => (*n, *m),
            MapDescriptor::PrimeQuantizer(c) => (c.n(), c.m()),
            MapDescriptor::Perturbed { matrix, .. } => (matrix.cols(), matrix.rows()),
            MapDescriptor::Composite { outer, inner } => (inner.dims().0, outer.matrix.rows()),
        }
    }

    fn validate(&self, path: &str) -> Result<()> {
        let at = |field: &str| {
            if path.is_empty() {
                field.to_string()
            } else {
                format!("{path}.{field}")
            }
        };
        match self {
            MapDescriptor::Linear { .. } | MapDescriptor::PrimeQuantizer(_) => {}
            MapDescriptor::Urysohn { a, b } => {
                if a.dim() != b.dim() {
                    return Err(Error::validation(at("b"), "a and b differ in dimension"));
                }
                if a == b {
                    return Err(Error::validation(at("b"), "a and b must be distinct"));
                }
            }
            MapDescriptor::AxisTube { n, m } => {
                if *n < 2 {
                    return Err(Error::validation(at("n"), "axis tube needs n ≥ 2"));
                }
                if *m < 2 {
                    return Err(Error::validation(at("m"), "axis tube needs m ≥ 2"));
                }
            }
            MapDescriptor::Perturbed {
                matrix,
                amplitude,
                frequencies,
                phases,
            } => {
                if !amplitude.is_finite() {
                    return Err(Error::validation(at("amplitude"), "must be finite"));
                }
                if frequencies.rows() != matrix.rows() || frequencies.cols() != matrix.cols() {
                    return Err(Error::validation(
                        at("frequencies"),
                        "must have the shape of `matrix`",
                    ));
                }
                if phases.len() != matrix.rows() || phases.iter().any(|p| !p.is_finite()) {
                    return Err(Error::validation(
                        at("phases"),
                        format!("needs {} finite entries", matrix.rows()),
                    ));
                }
            }
            MapDescriptor::Composite { outer, inner } => {
                inner.validate(&at("inner"))?;
                if outer.matrix.cols() != inner.dims().1 {
                    return Err(Error::validation(
                        at("matrix"),
                        format!(
                            "outer matrix has {} columns, inner map has {} outputs",
                            outer.matrix.cols(),
                            inner.dims().1
                        ),
                    ));
                }
            }
        }
        Ok(())
    }
}

impl MapEval for MapDescriptor {
    fn domain_dim(&self) -> usize {
        self.dims().0
    }

    fn codomain_dim(&self) -> usize {
        self.dims().1
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            MapDescriptor::Linear { matrix } => matrix.apply(x),
            MapDescriptor::Urysohn { a, b } => vec![urysohn_raw(a.coords(), b.coords(), x)],
            MapDescriptor::AxisTube { m, .. } => axis_tube_raw(x, *m),
            MapDescriptor::PrimeQuantizer(c) => c.value(x),
            MapDescriptor::Perturbed {
                matrix,
                amplitude,
                frequencies,
                phases,
            } => perturbed_value(matrix, *amplitude, frequencies, phases, x),
            MapDescriptor::Composite { outer, inner } => outer.apply(&inner.apply(x)),
        }
    }

    fn is_continuous(&self) -> bool {
        match self {
            MapDescriptor::PrimeQuantizer(_) => false,
            MapDescriptor::Composite { inner, .. } => inner.is_continuous(),
            _ => true,
        }
    }

    fn has_derivative(&self) -> bool {
        match self {
            MapDescriptor::PrimeQuantizer(_) => false,
            MapDescriptor::Composite { inner, .. } => inner.has_derivative(),
            _ => true,
        }
    }

    fn directional_derivative(&self, x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        match self {
            MapDescriptor::Linear { matrix } => Some(matrix.apply(v)),
            MapDescriptor::Urysohn { a, b } => {
                let g = urysohn_gradient(a.coords(), b.coords(), x);
                Some(vec![crate::geometry::dot(&g, v)])
            }
            MapDescriptor::AxisTube { m, .. } => Some(axis_tube_derivative(x, v, *m)),
            MapDescriptor::PrimeQuantizer(_) => None,
            MapDescriptor::Perturbed {
                matrix,
                amplitude,
                frequencies,
                phases,
            } => {
                let lin = matrix.apply(v);
                let arg = frequencies.apply(x);
                let darg = frequencies.apply(v);
                Some(
                    (0..lin.len())
                        .map(|i| lin[i] + amplitude * (arg[i] + phases[i]).cos() * darg[i])
                        .collect(),
                )
            }
            MapDescriptor::Composite { outer, inner } => {
                let d = inner.directional_derivative(x, v)?;
                Some(outer.matrix.apply(&d))
            }
        }
    }
}

/// On-disk form. Field order here is the serialised order.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DescriptorDoc {
    variant: String,
    n: usize,
    m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    continuous: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    offset: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    codec: Option<CodecConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frequencies: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phases: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    inner: Option<Box<DescriptorDoc>>,
}

impl DescriptorDoc {
    fn empty(variant: &str, n: usize, m: usize, continuous: bool) -> Self {
        DescriptorDoc {
            variant: variant.to_string(),
            n,
            m,
            continuous: Some(continuous),
            matrix: None,
            offset: None,
            a: None,
            b: None,
            codec: None,
            amplitude: None,
            frequencies: None,
            phases: None,
            inner: None,
        }
    }

    fn from_descriptor(d: &MapDescriptor) -> Self {
        let (n, m) = d.dims();
        let mut doc = DescriptorDoc::empty(d.variant_name(), n, m, d.is_continuous());
        match d {
            MapDescriptor::Linear { matrix } => doc.matrix = Some(matrix.data().to_vec()),
            MapDescriptor::Urysohn { a, b } => {
                doc.a = Some(a.coords().to_vec());
                doc.b = Some(b.coords().to_vec());
            }
            MapDescriptor::AxisTube { .. } => {}
            MapDescriptor::PrimeQuantizer(c) => doc.codec = Some(c.clone()),
            MapDescriptor::Perturbed {
                matrix,
                amplitude,
                frequencies,
                phases,
            } => {
                doc.matrix = Some(matrix.data().to_vec());
                doc.amplitude = Some(*amplitude);
                doc.frequencies = Some(frequencies.data().to_vec());
                doc.phases = Some(phases.clone());
            }
            MapDescriptor::Composite { outer, inner } => {
                doc.matrix = Some(outer.matrix.data().to_vec());
                doc.offset = Some(outer.offset.clone());
                doc.inner = Some(Box::new(DescriptorDoc::from_descriptor(inner)));
            }
        }
        doc
    }

    fn into_descriptor(self, path: &str) -> Result<MapDescriptor> {
        let at = |field: &str| {
            if path.is_empty() {
                field.to_string()
            } else {
                format!("{path}.{field}")
            }
        };
        fn need<T>(v: Option<T>, loc: String) -> Result<T> {
            v.ok_or_else(|| Error::validation(loc, "missing required field"))
        }
        let (n, m) = (self.n, self.m);
        if n == 0 || m == 0 {
            return Err(Error::validation(at("n"), "dimensions must be positive"));
        }
        let matrix_of = |data: Vec<f64>, rows: usize, cols: usize, field: &str| {
            DenseMatrix::new(rows, cols, data)
                .map_err(|e| Error::validation(at(field), e.to_string()))
        };
        let point_of = |data: Vec<f64>, field: &str| {
            Point::new(data).map_err(|e| Error::validation(at(field), e.to_string()))
        };

        let d = match self.variant.as_str() {
            "linear" => MapDescriptor::Linear {
                matrix: matrix_of(need(self.matrix, at("matrix"))?, m, n, "matrix")?,
            },
            "urysohn" => {
                if m != 1 {
                    return Err(Error::validation(at("m"), "urysohn maps have m = 1"));
                }
                let a = point_of(need(self.a, at("a"))?, "a")?;
                let b = point_of(need(self.b, at("b"))?, "b")?;
                if a.dim() != n {
                    return Err(Error::validation(
                        at("a"),
                        format!("expected {n} coordinates"),
                    ));
                }
                MapDescriptor::Urysohn { a, b }
            }
            "axis_tube" => MapDescriptor::AxisTube { n, m },
            "prime_quantizer" => {
                let codec = need(self.codec, at("codec"))?;
                if codec.n() != n || codec.m() != m {
                    return Err(Error::validation(
                        at("codec"),
                        "codec dimensions disagree with n and m",
                    ));
                }
                MapDescriptor::PrimeQuantizer(codec)
            }
            "perturbed" => MapDescriptor::Perturbed {
                matrix: matrix_of(need(self.matrix, at("matrix"))?, m, n, "matrix")?,
                amplitude: need(self.amplitude, at("amplitude"))?,
                frequencies: matrix_of(
                    need(self.frequencies, at("frequencies"))?,
                    m,
                    n,
                    "frequencies",
                )?,
                phases: need(self.phases, at("phases"))?,
            },
            "composite" => {
                let inner_doc = need(self.inner, at("inner"))?;
                let inner_m = inner_doc.m;
                let inner = inner_doc.into_descriptor(&at("inner"))?;
                if inner.domain_dim() != n {
                    return Err(Error::validation(
                        at("n"),
                        format!("inner map has domain dimension {}", inner.domain_dim()),
                    ));
                }
                let matrix = matrix_of(need(self.matrix, at("matrix"))?, m, inner_m, "matrix")?;
                let offset = self.offset.unwrap_or_else(|| vec![0.0; m]);
                let outer = Affine::new(matrix, offset)
                    .map_err(|e| Error::validation(at("offset"), e.to_string()))?;
                MapDescriptor::Composite {
                    outer,
                    inner: Box::new(inner),
                }
            }
            other => {
                return Err(Error::validation(
                    at("variant"),
                    format!("unknown variant `{other}`"),
                ))
            }
        };
        d.validate(path)?;
        if d.dims() != (n, m) {
            return Err(Error::validation(
                at("n"),
                format!(
                    "declared dimensions ({n}, {m}) disagree with parameters {:?}",
                    d.dims()
                ),
            ));
        }
        if let Some(flag) = self.continuous {
            if flag != d.is_continuous() {
                return Err(Error::validation(
                    at("continuous"),
                    format!(
                        "variant `{}` has continuity {}",
                        self.variant,
                        d.is_continuous()
                    ),
                ));
            }
        }
        Ok(d)
    }
}

/// Parses and validates a JSON map descriptor.
pub fn parse_descriptor(text: &str) -> Result<MapDescriptor> {
    let doc: DescriptorDoc = serde_json::from_str(text)?;
    doc.into_descriptor("")
}

/// Canonical pretty-printed JSON form of a descriptor.
pub fn serialize_descriptor(d: &MapDescriptor) -> String {
    serde_json::to_string_pretty(&DescriptorDoc::from_descriptor(d))
        .expect("descriptor documents always serialise")
}
