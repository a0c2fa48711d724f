//! Reference formulas used by the test suites, benches and CLI examples.

use crate::formula::{parse, Formula};
use crate::rational::{int, Rational};

#[derive(Debug, Clone)]
pub struct GalleryCase {
    pub name: &'static str,
    pub text: &'static str,
    /// Symmetric base box `[-half_width, half_width]` per axis.
    pub half_width: i64,
}

impl GalleryCase {
    pub fn formula(&self) -> Formula {
        parse(self.text).expect("gallery formulas parse")
    }

    pub fn bounds(&self) -> (Rational, Rational) {
        (int(-self.half_width), int(self.half_width))
    }
}

pub const GALLERY: &[GalleryCase] = &[
    GalleryCase { name: "point", text: "x1 = 0", half_width: 2 },
    GalleryCase { name: "interval", text: "x1 >= 0 & 1 - x1 >= 0", half_width: 2 },
    GalleryCase { name: "ray", text: "x1 >= 0", half_width: 2 },
    GalleryCase {
        name: "two_intervals",
        text: "(x1 + 3/2 >= 0 & -1/2 - x1 >= 0) | (x1 - 1/2 >= 0 & 3/2 - x1 >= 0)",
        half_width: 2,
    },
    GalleryCase { name: "unit_disk", text: "x1^2 + x2^2 <= 1", half_width: 2 },
    GalleryCase { name: "annulus", text: "x1^2 + x2^2 >= 1 & 4 - x1^2 - x2^2 >= 0", half_width: 3 },
    GalleryCase { name: "disk_minus_open_disk", text: "x1^2 + x2^2 <= 1 \\ x1^2 + x2^2 < 1/4", half_width: 2 },
    GalleryCase { name: "half_disk", text: "x1^2 + x2^2 <= 1 & x2 > 0", half_width: 2 },
    GalleryCase { name: "punctured_line", text: "x1 != 0", half_width: 2 },
    GalleryCase { name: "circle", text: "x1^2 + x2^2 = 1", half_width: 2 },
];

pub fn case(name: &str) -> Option<&'static GalleryCase> {
    GALLERY.iter().find(|c| c.name == name)
}
