use super::{EdgeTag, MeshError, Point};

const ON_SEGMENT_TOL: f64 = 1e-12;

/// Closed axis-aligned boundary segment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub from: Point,
    pub to: Point,
}

impl Segment {
    pub fn new(from: Point, to: Point) -> Self {
        Segment { from, to }
    }

    pub fn horizontal(y: f64, x0: f64, x1: f64) -> Self {
        Segment::new([x0, y], [x1, y])
    }

    pub fn vertical(x: f64, y0: f64, y1: f64) -> Self {
        Segment::new([x, y0], [x, y1])
    }

    pub fn left() -> Self {
        Segment::vertical(0.0, 0.0, 1.0)
    }

    pub fn right() -> Self {
        Segment::vertical(1.0, 0.0, 1.0)
    }

    pub fn bottom() -> Self {
        Segment::horizontal(0.0, 0.0, 1.0)
    }

    pub fn top() -> Self {
        Segment::horizontal(1.0, 0.0, 1.0)
    }

    pub fn contains(&self, p: Point) -> bool {
        let (lo_x, hi_x) = (self.from[0].min(self.to[0]), self.from[0].max(self.to[0]));
        let (lo_y, hi_y) = (self.from[1].min(self.to[1]), self.from[1].max(self.to[1]));
        p[0] >= lo_x - ON_SEGMENT_TOL
            && p[0] <= hi_x + ON_SEGMENT_TOL
            && p[1] >= lo_y - ON_SEGMENT_TOL
            && p[1] <= hi_y + ON_SEGMENT_TOL
    }
}

/// Assignment of exterior edges to Dirichlet or Neumann conditions, decided
/// by which segment contains the edge midpoint.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct BoundarySpec {
    pub dirichlet: Vec<Segment>,
    pub neumann: Vec<Segment>,
}

impl BoundarySpec {
    pub fn new(dirichlet: Vec<Segment>, neumann: Vec<Segment>) -> Self {
        BoundarySpec { dirichlet, neumann }
    }

    pub fn all_dirichlet() -> Self {
        BoundarySpec::new(vec![Segment::left(), Segment::right(), Segment::bottom(), Segment::top()], vec![])
    }

    pub fn all_neumann() -> Self {
        BoundarySpec::new(vec![], vec![Segment::left(), Segment::right(), Segment::bottom(), Segment::top()])
    }

    /// Dirichlet on the vertical sides, no-flux on top and bottom.
    pub fn left_right_dirichlet() -> Self {
        BoundarySpec::new(vec![Segment::left(), Segment::right()], vec![Segment::bottom(), Segment::top()])
    }

    /// Dirichlet on top and bottom, no-flux on the vertical sides.
    pub fn top_bottom_dirichlet() -> Self {
        BoundarySpec::new(vec![Segment::bottom(), Segment::top()], vec![Segment::left(), Segment::right()])
    }

    pub fn classify(&self, midpoint: Point) -> Result<EdgeTag, MeshError> {
        let in_d = self.dirichlet.iter().any(|s| s.contains(midpoint));
        let in_n = self.neumann.iter().any(|s| s.contains(midpoint));
        let problem = match (in_d, in_n) {
            (true, false) => return Ok(EdgeTag::Dirichlet),
            (false, true) => return Ok(EdgeTag::Neumann),
            (true, true) => "claimed by both a Dirichlet and a Neumann segment",
            (false, false) => "not covered by any boundary segment",
        };
        Err(MeshError::Boundary { x: midpoint[0], y: midpoint[1], problem })
    }
}
