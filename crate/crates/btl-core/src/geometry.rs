//! Screen geometry: bounding boxes, points and IoU.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::scalar::Scalar;

/// Violation of a geometric invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("bbox coordinates must be finite, got [{0}, {1}, {2}, {3}]")]
    NonFinite(String, String, String, String),
    #[error("bbox must satisfy x0 < x1 and y0 < y1, got [{0}, {1}, {2}, {3}]")]
    EmptyExtent(String, String, String, String),
    #[error("bbox coordinates must be non-negative, got [{0}, {1}, {2}, {3}]")]
    Negative(String, String, String, String),
}

/// Axis-aligned box in pixel coordinates, `x0 < x1` and `y0 < y1`, all
/// coordinates non-negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox<T = f64> {
    x0: T,
    y0: T,
    x1: T,
    y1: T,
}

impl<T: Scalar> BBox<T> {
    pub fn try_new(x0: T, y0: T, x1: T, y1: T) -> Result<Self, GeometryError> {
        let fmt4 = || {
            (
                format!("{x0}"),
                format!("{y0}"),
                format!("{x1}"),
                format!("{y1}"),
            )
        };
        if !(x0.is_finite() && y0.is_finite() && x1.is_finite() && y1.is_finite()) {
            let (a, b, c, d) = fmt4();
            return Err(GeometryError::NonFinite(a, b, c, d));
        }
        if x0 < T::zero() || y0 < T::zero() {
            let (a, b, c, d) = fmt4();
            return Err(GeometryError::Negative(a, b, c, d));
        }
        if !(x0 < x1 && y0 < y1) {
            let (a, b, c, d) = fmt4();
            return Err(GeometryError::EmptyExtent(a, b, c, d));
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    pub fn x0(&self) -> T {
        self.x0
    }
    pub fn y0(&self) -> T {
        self.y0
    }
    pub fn x1(&self) -> T {
        self.x1
    }
    pub fn y1(&self) -> T {
        self.y1
    }

    pub fn width(&self) -> T {
        self.x1 - self.x0
    }

    pub fn height(&self) -> T {
        self.y1 - self.y0
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    /// Boundary-inclusive point containment.
    pub fn contains(&self, p: Point<T>) -> bool {
        self.x0 <= p.x && p.x <= self.x1 && self.y0 <= p.y && p.y <= self.y1
    }

    /// Whether this box lies entirely inside a `width`×`height` screen.
    pub fn within_screen(&self, screen: Size<T>) -> bool {
        self.x1 <= screen.width && self.y1 <= screen.height
    }

    /// Wire form `[x0, y0, x1, y1]`, coordinates in shortest round-trip notation.
    pub fn to_bracket_string(&self) -> String {
        format!("[{}, {}, {}, {}]", self.x0, self.y0, self.x1, self.y1)
    }
}

/// Intersection-over-union of two boxes, in `[0, 1]`; `0` when disjoint.
pub fn iou<T: Scalar>(a: &BBox<T>, b: &BBox<T>) -> T {
    let ix = (a.x1.min(b.x1) - a.x0.max(b.x0)).max(T::zero());
    let iy = (a.y1.min(b.y1) - a.y0.max(b.y0)).max(T::zero());
    let inter = ix * iy;
    if inter <= T::zero() {
        return T::zero();
    }
    let union = a.area() + b.area() - inter;
    inter / union
}

impl<T: Scalar> Serialize for BBox<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.x0, self.y0, self.x1, self.y1].serialize(serializer)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for BBox<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [x0, y0, x1, y1] = <[T; 4]>::deserialize(deserializer)?;
        BBox::try_new(x0, y0, x1, y1).map_err(D::Error::custom)
    }
}

/// A pixel position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<T = f64> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance_to(&self, other: Point<T>) -> T {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

impl<T: Scalar> Serialize for Point<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.x, self.y].serialize(serializer)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Point<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [x, y] = <[T; 2]>::deserialize(deserializer)?;
        Ok(Point { x, y })
    }
}

/// Screen dimensions in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Size<T = f64> {
    pub width: T,
    pub height: T,
}

impl<T: Scalar> Size<T> {
    pub fn new(width: T, height: T) -> Self {
        Self { width, height }
    }
}

impl<T: Scalar> Serialize for Size<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.width, self.height].serialize(serializer)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Size<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [width, height] = <[T; 2]>::deserialize(deserializer)?;
        Ok(Size { width, height })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bb(x0: f64, y0: f64, x1: f64, y1: f64) -> BBox<f64> {
        BBox::try_new(x0, y0, x1, y1).unwrap()
    }

    #[test]
    fn iou_identical_boxes_is_one() {
        let a = bb(0.0, 0.0, 10.0, 10.0);
        assert_eq!(iou(&a, &a), 1.0);
    }

    #[test]
    fn iou_disjoint_is_zero() {
        let a = bb(0.0, 0.0, 1.0, 1.0);
        let b = bb(5.0, 5.0, 6.0, 6.0);
        assert_eq!(iou(&a, &b), 0.0);
    }

    #[test]
    fn iou_partial_overlap() {
        // intersection 1, union 7
        let a = bb(0.0, 0.0, 2.0, 2.0);
        let b = bb(1.0, 1.0, 3.0, 3.0);
        assert!((iou(&a, &b) - 1.0 / 7.0).abs() < 1e-15);
        assert_eq!(iou(&a, &b), iou(&b, &a));
    }

    #[test]
    fn iou_touching_edges_is_zero() {
        let a = bb(0.0, 0.0, 1.0, 1.0);
        let b = bb(1.0, 0.0, 2.0, 1.0);
        assert_eq!(iou(&a, &b), 0.0);
    }

    #[test]
    fn bbox_rejects_invalid() {
        assert!(BBox::try_new(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(BBox::try_new(5.0, 0.0, 1.0, 1.0).is_err());
        assert!(BBox::try_new(-1.0, 0.0, 1.0, 1.0).is_err());
        assert!(BBox::try_new(f64::NAN, 0.0, 1.0, 1.0).is_err());
        assert!(BBox::try_new(0.0, 0.0, f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn contains_is_boundary_inclusive() {
        let b = bb(10.0, 20.0, 110.0, 60.0);
        assert!(b.contains(Point::new(60.0, 40.0)));
        assert!(b.contains(Point::new(10.0, 20.0)));
        assert!(b.contains(Point::new(110.0, 60.0)));
        assert!(!b.contains(Point::new(111.0, 40.0)));
    }

    #[test]
    fn bbox_serde_roundtrip_and_validation() {
        let b = bb(0.0, 0.5, 10.0, 10.25);
        let s = serde_json::to_string(&b).unwrap();
        assert_eq!(s, "[0.0,0.5,10.0,10.25]");
        let back: BBox<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(b, back);
        assert!(serde_json::from_str::<BBox<f64>>("[5,5,1,9]").is_err());
    }
}
