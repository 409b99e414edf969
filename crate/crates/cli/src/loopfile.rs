//! Loop documents: `{"plane": "C_I", "vertices": [[u, v], ...], "orientation": 1}`.
//!
//! Tagged planes take in-plane pairs. `"free"` loops take full coordinate
//! quadruples and a `"qubits"` count.

use std::path::Path;

use anyhow::{bail, Context};
use holonomy_core::controls::{ControlPoint, OneQubitPoint, TwoQubitPoint};
use holonomy_core::holonomy::{Loop, Plane};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopFile {
    pub plane: Plane,
    pub vertices: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<i8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubits: Option<usize>,
}

impl LoopFile {
    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading loop file {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing loop file {}", path.display()))
    }

    pub fn from_loop(lp: &Loop) -> anyhow::Result<Self> {
        let plane = lp.plane();
        let (vertices, orientation, qubits) = if plane == Plane::Free {
            (lp.vertices().iter().map(|v| v.values().to_vec()).collect(), None, Some(lp.qubits()))
        } else {
            let pts = lp.plane_coords()?;
            (pts.iter().map(|p| vec![p.0, p.1]).collect(), Some(lp.orientation()? as i8), None)
        };
        Ok(LoopFile { plane, vertices, orientation, qubits })
    }

    /// Builds the loop, closing it when the last vertex differs from the first.
    pub fn to_loop(&self) -> anyhow::Result<Loop> {
        let lp = if self.plane == Plane::Free {
            let qubits = self.qubits.unwrap_or(1);
            let pts = self
                .vertices
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let &[a, b, c, d] = v.as_slice() else {
                        bail!("vertex {i}: free loops need 4 coordinates, got {}", v.len());
                    };
                    Ok(match qubits {
                        1 => ControlPoint::from(OneQubitPoint::new(a, b, c, d)),
                        2 => ControlPoint::from(TwoQubitPoint::new(a, b, c, d)),
                        q => bail!("qubits must be 1 or 2, got {q}"),
                    })
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            let mut pts = pts;
            if let (Some(f), Some(l)) = (pts.first().copied(), pts.last()) {
                if f != *l {
                    pts.push(f);
                }
            }
            Loop::new(pts, Plane::Free)?
        } else {
            let pts = self
                .vertices
                .iter()
                .enumerate()
                .map(|(i, v)| match v.as_slice() {
                    &[u, w] => Ok((u, w)),
                    _ => bail!("vertex {i}: plane {} takes [u, v] pairs, got {} numbers", self.plane, v.len()),
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            Loop::on_plane(self.plane, &pts)?
        };
        if let Some(o) = self.orientation {
            if o != 1 && o != -1 {
                bail!("orientation must be 1 or -1, got {o}");
            }
            if self.plane != Plane::Free && lp.orientation()? as i8 != o {
                bail!(
                    "vertices run {} but orientation is {o}; reverse the vertex list or flip the sign",
                    if o == 1 { "clockwise" } else { "counter-clockwise" }
                );
            }
        }
        Ok(lp)
    }
}
