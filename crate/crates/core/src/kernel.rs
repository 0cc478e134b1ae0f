use serde::{Deserialize, Serialize};

/// The 2×2 matrix kernel evaluated at an ordered point pair `(x, y)`:
///
/// ```text
/// [ S(x,y)  I(x,y) ]
/// [ D(x,y)  S(y,x) ]
/// ```
///
/// The same layout is used in the finite, Bessel and Airy regimes. In the
/// Airy regime `S(x,y) = f22(X,Y)`, `I = f21`, `D = f12` and
/// `S(y,x) = f11(X,Y)`; the quaternion determinant is invariant under that
/// relabelling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct KernelBlock {
    pub s_xy: f64,
    pub i_xy: f64,
    pub d_xy: f64,
    pub s_yx: f64,
}

impl KernelBlock {
    pub fn as_array(&self) -> [[f64; 2]; 2] {
        [[self.s_xy, self.i_xy], [self.d_xy, self.s_yx]]
    }
}
