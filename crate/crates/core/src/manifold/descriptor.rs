use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{mandel_len, skew_len};

/// Which manifold a point lives on, and therefore how its flat storage and
/// tangent coordinates are laid out.
///
/// | kind | ambient | tangent |
/// |------|---------|---------|
/// | `Euclidean(m)` | m | m |
/// | `Sphere(m)` | m+1 | m+1 (ambient vectors orthogonal to the base) |
/// | `UnitQuaternion` | 4 (`[w, x, y, z]`) | 3 |
/// | `SpecialOrthogonal(m)` | m² (row-major) | m(m-1)/2 |
/// | `Spd(m)` | m² (row-major) | m(m+1)/2 (Mandel) |
/// | `Product(parts)` | sum | sum |
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ManifoldDescriptor {
    Euclidean(usize),
    Sphere(usize),
    UnitQuaternion,
    SpecialOrthogonal(usize),
    Spd(usize),
    Product(Arc<[ManifoldDescriptor]>),
}

impl ManifoldDescriptor {
    /// Cartesian product of `parts`. Log, exp and distance act blockwise.
    pub fn product(parts: Vec<ManifoldDescriptor>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::EmptyProduct);
        }
        Ok(ManifoldDescriptor::Product(parts.into()))
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            ManifoldDescriptor::Euclidean(m) => *m,
            ManifoldDescriptor::Sphere(m) => m + 1,
            ManifoldDescriptor::UnitQuaternion => 4,
            ManifoldDescriptor::SpecialOrthogonal(m) | ManifoldDescriptor::Spd(m) => m * m,
            ManifoldDescriptor::Product(parts) => parts.iter().map(Self::ambient_dim).sum(),
        }
    }

    pub fn tangent_dim(&self) -> usize {
        match self {
            ManifoldDescriptor::Euclidean(m) => *m,
            ManifoldDescriptor::Sphere(m) => m + 1,
            ManifoldDescriptor::UnitQuaternion => 3,
            ManifoldDescriptor::SpecialOrthogonal(m) => skew_len(*m),
            ManifoldDescriptor::Spd(m) => mandel_len(*m),
            ManifoldDescriptor::Product(parts) => parts.iter().map(Self::tangent_dim).sum(),
        }
    }

    /// Short kind name as used by the descriptor grammar.
    pub fn kind_name(&self) -> &'static str {
        match self {
            ManifoldDescriptor::Euclidean(_) => "euclidean",
            ManifoldDescriptor::Sphere(_) => "sphere",
            ManifoldDescriptor::UnitQuaternion => "quat",
            ManifoldDescriptor::SpecialOrthogonal(_) => "so",
            ManifoldDescriptor::Spd(_) => "spd",
            ManifoldDescriptor::Product(_) => "product",
        }
    }

    /// Size parameter `m`, if the kind has one.
    pub fn size_param(&self) -> Option<usize> {
        match self {
            ManifoldDescriptor::Euclidean(m)
            | ManifoldDescriptor::Sphere(m)
            | ManifoldDescriptor::SpecialOrthogonal(m)
            | ManifoldDescriptor::Spd(m) => Some(*m),
            ManifoldDescriptor::UnitQuaternion | ManifoldDescriptor::Product(_) => None,
        }
    }

    /// Largest tangent norm for which log inverts exp, if finite.
    ///
    /// Quaternions are hemisphere-aligned before taking the log, which halves
    /// the usable radius compared to the plain 3-sphere.
    pub fn injectivity_radius(&self) -> Option<f64> {
        use std::f64::consts::{FRAC_PI_2, PI};
        match self {
            ManifoldDescriptor::Sphere(_) | ManifoldDescriptor::SpecialOrthogonal(_) => Some(PI),
            ManifoldDescriptor::UnitQuaternion => Some(FRAC_PI_2),
            ManifoldDescriptor::Euclidean(_) | ManifoldDescriptor::Spd(_) => None,
            ManifoldDescriptor::Product(parts) => parts
                .iter()
                .filter_map(Self::injectivity_radius)
                .reduce(f64::min),
        }
    }

    /// Components of a product, or the descriptor itself.
    pub fn components(&self) -> Vec<ManifoldDescriptor> {
        match self {
            ManifoldDescriptor::Product(parts) => parts.to_vec(),
            other => vec![other.clone()],
        }
    }

    /// Column names for CSV storage, one per ambient coordinate.
    pub fn column_names(&self) -> Vec<String> {
        match self {
            ManifoldDescriptor::Euclidean(m) => (0..*m).map(|i| format!("x{i}")).collect(),
            ManifoldDescriptor::Sphere(m) => (0..=*m).map(|i| format!("s{i}")).collect(),
            ManifoldDescriptor::UnitQuaternion => ["qw", "qx", "qy", "qz"].map(String::from).to_vec(),
            ManifoldDescriptor::SpecialOrthogonal(m) => matrix_columns("r", *m),
            ManifoldDescriptor::Spd(m) => matrix_columns("k", *m),
            ManifoldDescriptor::Product(parts) => parts
                .iter()
                .enumerate()
                .flat_map(|(i, p)| p.column_names().into_iter().map(move |c| format!("p{i}_{c}")))
                .collect(),
        }
    }

    fn check_params(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDescriptor(msg));
        match self {
            ManifoldDescriptor::Euclidean(0) => bad("euclidean dimension must be at least 1".into()),
            ManifoldDescriptor::Sphere(0) => bad("sphere dimension must be at least 1".into()),
            ManifoldDescriptor::SpecialOrthogonal(m) if *m < 2 => {
                bad("so dimension must be at least 2".into())
            }
            ManifoldDescriptor::Spd(0) => bad("spd dimension must be at least 1".into()),
            ManifoldDescriptor::Product(parts) => {
                if parts.is_empty() {
                    return Err(Error::EmptyProduct);
                }
                parts.iter().try_for_each(Self::check_params)
            }
            _ => Ok(()),
        }
    }
}

fn matrix_columns(prefix: &str, m: usize) -> Vec<String> {
    (0..m)
        .flat_map(|i| (0..m).map(move |j| format!("{prefix}{i}{j}")))
        .collect()
}

impl fmt::Display for ManifoldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifoldDescriptor::UnitQuaternion => f.write_str("quat"),
            ManifoldDescriptor::Product(parts) => {
                f.write_str("product(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str(")")
            }
            other => write!(f, "{}:{}", other.kind_name(), other.size_param().unwrap_or(0)),
        }
    }
}

impl FromStr for ManifoldDescriptor {
    type Err = Error;

    /// Parses `euclidean:m | sphere:m | quat | so:m | spd:m | product(a,b,...)`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parser = Parser { src: s, pos: 0 };
        let d = parser.descriptor()?;
        parser.skip_ws();
        if parser.pos != s.len() {
            return Err(parser.error("trailing characters"));
        }
        d.check_params()?;
        Ok(d)
    }
}

impl TryFrom<String> for ManifoldDescriptor {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ManifoldDescriptor> for String {
    fn from(d: ManifoldDescriptor) -> String {
        d.to_string()
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, what: &str) -> Error {
        Error::InvalidDescriptor(format!("{what} at offset {} in {:?}", self.pos, self.src))
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn ident(&mut self) -> &str {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let len = rest
            .find(|c: char| !c.is_ascii_alphanumeric() && c != '_')
            .unwrap_or(rest.len());
        self.pos += len;
        &self.src[start..start + len]
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<usize> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        if len == 0 {
            return Err(self.error("expected a dimension"));
        }
        let n = rest[..len].parse().map_err(|_| self.error("dimension out of range"))?;
        self.pos += len;
        Ok(n)
    }

    fn descriptor(&mut self) -> Result<ManifoldDescriptor> {
        let name = self.ident().to_ascii_lowercase();
        match name.as_str() {
            "quat" | "quaternion" | "s3q" => Ok(ManifoldDescriptor::UnitQuaternion),
            "product" => {
                if !self.eat('(') {
                    return Err(self.error("expected '('"));
                }
                let mut parts = vec![self.descriptor()?];
                while self.eat(',') {
                    parts.push(self.descriptor()?);
                }
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                ManifoldDescriptor::product(parts)
            }
            "euclidean" | "sphere" | "so" | "spd" => {
                if !self.eat(':') {
                    return Err(self.error("expected ':'"));
                }
                let m = self.number()?;
                Ok(match name.as_str() {
                    "euclidean" => ManifoldDescriptor::Euclidean(m),
                    "sphere" => ManifoldDescriptor::Sphere(m),
                    "so" => ManifoldDescriptor::SpecialOrthogonal(m),
                    _ => ManifoldDescriptor::Spd(m),
                })
            }
            "" => Err(self.error("expected a manifold name")),
            other => Err(Error::InvalidDescriptor(format!("unknown manifold {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims() {
        use ManifoldDescriptor::*;
        assert_eq!((Euclidean(3).ambient_dim(), Euclidean(3).tangent_dim()), (3, 3));
        assert_eq!((Sphere(2).ambient_dim(), Sphere(2).tangent_dim()), (3, 3));
        assert_eq!((UnitQuaternion.ambient_dim(), UnitQuaternion.tangent_dim()), (4, 3));
        assert_eq!((SpecialOrthogonal(3).ambient_dim(), SpecialOrthogonal(3).tangent_dim()), (9, 3));
        assert_eq!((SpecialOrthogonal(4).ambient_dim(), SpecialOrthogonal(4).tangent_dim()), (16, 6));
        assert_eq!((Spd(2).ambient_dim(), Spd(2).tangent_dim()), (4, 3));
        let p = ManifoldDescriptor::product(vec![Euclidean(3), UnitQuaternion]).unwrap();
        assert_eq!((p.ambient_dim(), p.tangent_dim()), (7, 6));
        let watering = ManifoldDescriptor::product(vec![Euclidean(3), UnitQuaternion, Spd(3)]).unwrap();
        assert_eq!(watering.tangent_dim(), 12);
    }

    #[test]
    fn empty_product_rejected() {
        assert!(matches!(ManifoldDescriptor::product(vec![]), Err(Error::EmptyProduct)));
        assert!(matches!("product()".parse::<ManifoldDescriptor>(), Err(_)));
    }

    #[test]
    fn grammar_round_trip() {
        for s in ["euclidean:2", "sphere:3", "quat", "so:3", "spd:2", "product(euclidean:2,spd:2)",
            "product(euclidean:3,quat,product(so:4,spd:3))"]
        {
            let d: ManifoldDescriptor = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        let d: ManifoldDescriptor = " product( euclidean:2 , spd:2 ) ".parse().unwrap();
        assert_eq!(d.to_string(), "product(euclidean:2,spd:2)");
    }

    #[test]
    fn grammar_errors() {
        for s in ["", "torus:2", "euclidean", "euclidean:", "so:1", "spd:0", "product(quat", "quat,quat"] {
            assert!(s.parse::<ManifoldDescriptor>().is_err(), "{s}");
        }
    }

    #[test]
    fn columns_match_ambient_dim() {
        let d: ManifoldDescriptor = "product(euclidean:2,spd:2,quat)".parse().unwrap();
        assert_eq!(d.column_names().len(), d.ambient_dim());
        assert_eq!(d.column_names()[0], "p0_x0");
    }
}
