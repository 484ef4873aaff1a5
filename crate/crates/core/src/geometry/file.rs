use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ConvexDomain, Point, DEFAULT_RESOLUTION};
use crate::error::Result;

/// On-disk description of a domain.
///
/// ```json
/// {"kind": "polygon", "vertices": [[0, 0], [1, 0], [0, 1]]}
/// {"kind": "disk", "center": [0, 0], "radius": 1}
/// {"kind": "regular-ngon", "n": 512}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainSpec {
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    Disk {
        #[serde(default = "origin")]
        center: [f64; 2],
        #[serde(default = "one")]
        radius: f64,
        #[serde(default)]
        n: Option<usize>,
    },
    Sector {
        aperture: f64,
        #[serde(default = "one")]
        radius: f64,
        #[serde(default)]
        n: Option<usize>,
    },
    /// The unit square `(0, 1)²`.
    Square,
    RegularNgon {
        n: usize,
        #[serde(default = "origin")]
        center: [f64; 2],
        #[serde(default = "one")]
        radius: f64,
    },
}

fn origin() -> [f64; 2] {
    [0.0, 0.0]
}

fn one() -> f64 {
    1.0
}

impl DomainSpec {
    pub fn build(&self) -> Result<ConvexDomain> {
        match self {
            DomainSpec::Polygon { vertices } => ConvexDomain::polygon(vertices.iter().copied()),
            DomainSpec::Disk { center, radius, n } => {
                ConvexDomain::disk_with_resolution((*center).into(), *radius, n.unwrap_or(DEFAULT_RESOLUTION))
            }
            DomainSpec::Sector { aperture, radius, n } => {
                ConvexDomain::sector_with_resolution(*aperture, *radius, n.unwrap_or(DEFAULT_RESOLUTION))
            }
            DomainSpec::Square => Ok(ConvexDomain::unit_square()),
            DomainSpec::RegularNgon { n, center, radius } => {
                ConvexDomain::regular_ngon(*n, Point::from(*center), *radius)
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainKind;

    #[test]
    fn parses_each_kind() {
        let sq = DomainSpec::from_json(r#"{"kind": "square"}"#).unwrap().build().unwrap();
        assert_eq!(sq.vertices().len(), 4);

        let poly = DomainSpec::from_json(r#"{"kind": "polygon", "vertices": [[0,0],[4,0],[0,3]]}"#)
            .unwrap()
            .build()
            .unwrap();
        assert!((poly.area() - 6.0).abs() < 1e-12);

        let disk = DomainSpec::from_json(r#"{"kind": "disk", "radius": 2, "n": 64}"#)
            .unwrap()
            .build()
            .unwrap();
        assert!(matches!(disk.kind(), DomainKind::Disk { radius, .. } if radius == 2.0));
        assert_eq!(disk.vertices().len(), 64);

        let ngon = DomainSpec::from_json(r#"{"kind": "regular-ngon", "n": 7}"#).unwrap().build().unwrap();
        assert_eq!(ngon.vertices().len(), 7);

        let sector = DomainSpec::from_json(r#"{"kind": "sector", "aperture": 1.0}"#).unwrap().build().unwrap();
        assert!(matches!(sector.kind(), DomainKind::Sector { .. }));
    }

    #[test]
    fn rejects_unknown_kind() {
        assert!(DomainSpec::from_json(r#"{"kind": "ellipse"}"#).is_err());
    }
}
