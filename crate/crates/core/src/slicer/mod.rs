//! Planar, parametric and helical slicing.

mod helical;
pub mod io;
mod planar;

pub use helical::slice_helical;
pub use planar::{slice_planar, slice_planar_with};

use crate::error::{Error, Result};
use crate::geometry::{layer_centers, Contour2};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SliceMode {
    Planar,
    Helical,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlicePlan {
    pub layer_height: f64,
    pub mode: SliceMode,
    pub samples_per_turn: usize,
    /// Print the first helical turn flat before ramping.
    pub first_layer_flat: bool,
}

impl SlicePlan {
    pub fn planar(layer_height: f64) -> Self {
        SlicePlan {
            layer_height,
            mode: SliceMode::Planar,
            samples_per_turn: 360,
            first_layer_flat: true,
        }
    }

    pub fn helical(layer_height: f64, samples_per_turn: usize) -> Self {
        SlicePlan {
            layer_height,
            mode: SliceMode::Helical,
            samples_per_turn,
            first_layer_flat: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.layer_height > 0.0) || !self.layer_height.is_finite() {
            return Err(Error::param("layer_height", "must be positive"));
        }
        if self.samples_per_turn < 36 {
            return Err(Error::param(
                "samples_per_turn",
                format!("need at least 36, got {}", self.samples_per_turn),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub z: f64,
    pub contours: Vec<Contour2>,
}

/// Layers at uniform spacing, bottom to top.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerStack {
    layer_height: f64,
    layers: Vec<Layer>,
}

impl LayerStack {
    pub fn new(layer_height: f64, layers: Vec<Layer>) -> Result<Self> {
        if !(layer_height > 0.0) {
            return Err(Error::param("layer_height", "must be positive"));
        }
        for (i, w) in layers.windows(2).enumerate() {
            let gap = w[1].z - w[0].z;
            if !(gap > 0.0) || (gap - layer_height).abs() > 1e-9 {
                return Err(Error::InvalidGeometry(format!(
                    "layers {i} and {} are {gap} mm apart, expected {layer_height}",
                    i + 1
                )));
            }
        }
        for (i, l) in layers.iter().enumerate() {
            if let Some(c) = l.contours.iter().find(|c| c.z() != l.z) {
                return Err(Error::InvalidGeometry(format!(
                    "layer {i} at z = {} holds a contour at z = {}",
                    l.z,
                    c.z()
                )));
            }
        }
        Ok(LayerStack {
            layer_height,
            layers,
        })
    }

    /// One contour per layer, e.g. straight from a generator.
    pub fn from_contours(layer_height: f64, contours: Vec<Contour2>) -> Result<Self> {
        let layers = contours
            .into_iter()
            .map(|c| Layer {
                z: c.z(),
                contours: vec![c],
            })
            .collect();
        LayerStack::new(layer_height, layers)
    }

    pub fn layer_height(&self) -> f64 {
        self.layer_height
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// Σ area·h over all contours; holes subtract.
    pub fn volume(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| &l.contours)
            .map(|c| c.signed_area() * self.layer_height)
            .sum()
    }
}

/// Evaluate `contour_fn` at each mid-layer height of `[0, height]`.
pub fn slice_parametric<F>(contour_fn: F, height: f64, plan: &SlicePlan) -> Result<LayerStack>
where
    F: Fn(f64) -> Result<Vec<Contour2>>,
{
    plan.validate()?;
    if !(height > 0.0) {
        return Err(Error::param("height", "must be positive"));
    }
    let layers = layer_centers(height, plan.layer_height)
        .into_iter()
        .enumerate()
        .map(|(i, z)| {
            contour_fn(z)
                .map(|contours| Layer { z, contours })
                .map_err(|e| Error::Layer {
                    layer: i,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    LayerStack::new(plan.layer_height, layers)
}
