//! Parametric geometry generators.
//!
//! Every generator emits sampled polygons rather than analytic curves, so the
//! rest of the chain only ever consumes polylines and contours.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::{layer_centers, Contour2, Point2, Polyline3};

/// Circle whose radius oscillates sinusoidally with the polar angle:
/// `r(θ) = R_c + a·sin(n·θ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillationParams {
    pub base_radius: f64,
    pub amplitude: f64,
    pub frequency: u32,
    pub samples: usize,
}

impl OscillationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.base_radius > 0.0) || !self.base_radius.is_finite() {
            return Err(Error::param("R_c", "base radius must be positive"));
        }
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(Error::param("a", "amplitude must be non-negative"));
        }
        if self.amplitude >= self.base_radius {
            return Err(Error::param(
                "a",
                format!(
                    "amplitude {} must stay below the base radius {}",
                    self.amplitude, self.base_radius
                ),
            ));
        }
        if self.samples < 16 {
            return Err(Error::param("samples", "need at least 16 samples per revolution"));
        }
        Ok(())
    }

    pub fn radius_at(&self, theta: f64) -> f64 {
        self.base_radius + self.amplitude * (self.frequency as f64 * theta).sin()
    }

    fn planar_points(&self) -> Vec<Point2> {
        (0..self.samples)
            .map(|k| {
                let t = TAU * k as f64 / self.samples as f64;
                let r = self.radius_at(t);
                Point2::new(r * t.cos(), r * t.sin())
            })
            .collect()
    }
}

/// Closed counter-clockwise path at height `z`; vertex `k` sits at
/// `θ = 2πk / samples`.
pub fn gen_oscillating_circle(params: &OscillationParams, z: f64) -> Result<Polyline3> {
    params.validate()?;
    let points = params.planar_points().into_iter().map(|p| p.at_z(z)).collect();
    Polyline3::new(points, true)
}

/// Same curve as [`gen_oscillating_circle`], as a layer contour.
pub fn oscillating_contour(params: &OscillationParams, z: f64) -> Result<Contour2> {
    params.validate()?;
    Contour2::new(z, params.planar_points())
}

/// Per-layer phase-shifted radial modulation of a base contour. With a shift
/// of π, consecutive layers oscillate in anti-phase.
#[derive(Clone, Debug, PartialEq)]
pub struct WeaveParams {
    pub base: Contour2,
    pub amplitude: f64,
    pub frequency: u32,
    pub layer_phase_shift: f64,
}

impl WeaveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(Error::param("amplitude", "must be non-negative"));
        }
        if self.frequency < 1 {
            return Err(Error::param("frequency", "must be at least 1"));
        }
        if !self.layer_phase_shift.is_finite() {
            return Err(Error::param("layer_phase_shift", "must be finite"));
        }
        let inradius = self.base.inradius_about(self.base.centroid());
        if self.amplitude >= inradius {
            return Err(Error::SelfIntersection(format!(
                "weave amplitude {} reaches the base contour inradius {inradius}",
                self.amplitude
            )));
        }
        Ok(())
    }

    /// Signed radial offset of layer `layer` at polar angle `theta`.
    pub fn offset(&self, layer: usize, theta: f64) -> f64 {
        self.amplitude
            * (self.frequency as f64 * theta + layer as f64 * self.layer_phase_shift).sin()
    }

    pub fn layer(&self, layer: usize, z: f64) -> Result<Contour2> {
        let c = self.base.centroid();
        let points = self
            .base
            .points()
            .iter()
            .map(|&p| {
                let d = p - c;
                let r = d.norm();
                let theta = d.y.atan2(d.x);
                p + d * (self.offset(layer, theta) / r)
            })
            .collect();
        Contour2::new(z, points).map_err(|e| Error::Layer {
            layer,
            source: Box::new(e),
        })
    }
}

/// Layers at the mid-layer heights `(i + ½)·layer_height`.
pub fn gen_woven_layers(
    params: &WeaveParams,
    layer_count: usize,
    layer_height: f64,
) -> Result<Vec<Contour2>> {
    if layer_count < 1 {
        return Err(Error::param("layer_count", "need at least one layer"));
    }
    if !(layer_height > 0.0) {
        return Err(Error::param("layer_height", "must be positive"));
    }
    params.validate()?;
    (0..layer_count)
        .map(|i| params.layer(i, layer_height * (i as f64 + 0.5)))
        .collect()
}

/// Prism morphing from a `rect_width × rect_depth` rectangle at z = 0 to a
/// circle at z = `height`, twisting by `total_twist_deg` on the way up.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwistParams {
    pub rect_width: f64,
    pub rect_depth: f64,
    pub circle_radius: f64,
    pub height: f64,
    pub total_twist_deg: f64,
    pub samples: usize,
}

impl TwistParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rect_width", self.rect_width),
            ("rect_depth", self.rect_depth),
            ("circle_radius", self.circle_radius),
            ("height", self.height),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        if !self.total_twist_deg.is_finite() {
            return Err(Error::param("total_twist", "must be finite"));
        }
        if self.samples < 8 {
            return Err(Error::param("samples", "need at least 8 samples per loop"));
        }
        Ok(())
    }

    /// Polar radius of the rectangle boundary.
    pub fn rect_radius(&self, theta: f64) -> f64 {
        let (c, s) = (theta.cos().abs(), theta.sin().abs());
        let rx = if c > 0.0 { self.rect_width / (2.0 * c) } else { f64::INFINITY };
        let ry = if s > 0.0 { self.rect_depth / (2.0 * s) } else { f64::INFINITY };
        rx.min(ry)
    }

    /// Blended radius at blend parameter `s` ∈ [0, 1], before rotation.
    pub fn radius_at(&self, s: f64, theta: f64) -> f64 {
        (1.0 - s) * self.rect_radius(theta) + s * self.circle_radius
    }

    /// Cross-section at height `z` (clamped to the prism).
    pub fn section(&self, z: f64) -> Result<Contour2> {
        self.validate()?;
        let s = (z / self.height).clamp(0.0, 1.0);
        let twist = self.total_twist_deg.to_radians() * s;
        let points = (0..self.samples)
            .map(|k| {
                let theta = TAU * k as f64 / self.samples as f64;
                let r = self.radius_at(s, theta);
                let a = theta + twist;
                Point2::new(r * a.cos(), r * a.sin())
            })
            .collect();
        Contour2::new(z, points)
    }
}

pub fn gen_twisted_prism(params: &TwistParams, layer_height: f64) -> Result<Vec<Contour2>> {
    params.validate()?;
    if !(layer_height > 0.0) {
        return Err(Error::param("layer_height", "must be positive"));
    }
    layer_centers(params.height, layer_height)
        .into_iter()
        .enumerate()
        .map(|(i, z)| {
            params.section(z).map_err(|e| Error::Layer {
                layer: i,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Circle with `samples` vertices starting on the +x axis.
pub fn circle_contour(radius: f64, samples: usize, z: f64) -> Result<Contour2> {
    if !(radius > 0.0) {
        return Err(Error::param("radius", "must be positive"));
    }
    let points = (0..samples)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / samples as f64;
            Point2::new(radius * t.cos(), radius * t.sin())
        })
        .collect();
    Contour2::new(z, points)
}
