//! Triangle `.node`/`.ele` text formats and the canonical mesh dump.
//!
//! The parser accepts 0- or 1-based node numbering (detected from the first
//! data row), optional attribute columns, optional boundary markers, and `#`
//! comments. Coordinates are written with the shortest representation that
//! round-trips, so export followed by import reproduces them bit for bit.

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};

struct Lines<'a> {
    inner: std::str::Lines<'a>,
    line_no: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines(),
            line_no: 0,
        }
    }

    /// Next non-empty, non-comment line, split into whitespace fields.
    fn next_fields(&mut self) -> Option<(usize, Vec<&'a str>)> {
        loop {
            let line = self.inner.next()?;
            self.line_no += 1;
            let line = line.split('#').next().unwrap_or("");
            let fields: Vec<&str> = line.split_whitespace().collect();
            if !fields.is_empty() {
                return Some((self.line_no, fields));
            }
        }
    }
}

fn parse_field<T: std::str::FromStr>(line: usize, field: &str, what: &str) -> Result<T> {
    field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse {what} from {field:?}"),
    })
}

/// Parses a Triangle `.node` file together with its `.ele` file.
pub fn import_triangle(node_text: &str, ele_text: &str) -> Result<Mesh> {
    let (points, markers, base) = parse_node(node_text)?;
    let triangles = parse_ele(ele_text, points.len(), base)?;
    Mesh::from_raw_with_flags(points, triangles, markers)
}

fn parse_node(text: &str) -> Result<(Vec<Point>, Option<Vec<bool>>, usize)> {
    let mut lines = Lines::new(text);
    let (hline, header) = lines.next_fields().ok_or(Error::Parse {
        line: 0,
        message: "empty .node input".into(),
    })?;
    if header.len() < 4 {
        return Err(Error::Parse {
            line: hline,
            message: format!(".node header needs 4 fields, found {}", header.len()),
        });
    }
    let count: usize = parse_field(hline, header[0], "node count")?;
    let dim: usize = parse_field(hline, header[1], "dimension")?;
    if dim != 2 {
        return Err(Error::Parse {
            line: hline,
            message: format!("only 2D .node files are supported, dimension = {dim}"),
        });
    }
    let n_attrs: usize = parse_field(hline, header[2], "attribute count")?;
    let has_markers: usize = parse_field(hline, header[3], "boundary marker flag")?;

    let mut points = Vec::with_capacity(count);
    let mut flags = Vec::with_capacity(count);
    let mut base = 0usize;
    for row in 0..count {
        let (lno, fields) = lines.next_fields().ok_or(Error::Parse {
            line: 0,
            message: format!(".node file ended after {row} of {count} rows"),
        })?;
        let expected = 3 + n_attrs + if has_markers != 0 { 1 } else { 0 };
        if fields.len() < expected {
            return Err(Error::Parse {
                line: lno,
                message: format!("node row has {} fields, expected {expected}", fields.len()),
            });
        }
        let index: usize = parse_field(lno, fields[0], "node index")?;
        if row == 0 {
            base = index; // 0- or 1-based numbering, detected here
            if base > 1 {
                return Err(Error::Parse {
                    line: lno,
                    message: format!("first node index must be 0 or 1, found {index}"),
                });
            }
        } else if index != row + base {
            return Err(Error::Parse {
                line: lno,
                message: format!("expected node index {}, found {index}", row + base),
            });
        }
        let x: f64 = parse_field(lno, fields[1], "x coordinate")?;
        let y: f64 = parse_field(lno, fields[2], "y coordinate")?;
        points.push(Point::new(x, y));
        if has_markers != 0 {
            let marker: i64 = parse_field(lno, fields[3 + n_attrs], "boundary marker")?;
            flags.push(marker != 0);
        }
    }
    let markers = if has_markers != 0 { Some(flags) } else { None };
    Ok((points, markers, base))
}

fn parse_ele(text: &str, n_nodes: usize, base: usize) -> Result<Vec<[usize; 3]>> {
    let mut lines = Lines::new(text);
    let (hline, header) = lines.next_fields().ok_or(Error::Parse {
        line: 0,
        message: "empty .ele input".into(),
    })?;
    if header.len() < 2 {
        return Err(Error::Parse {
            line: hline,
            message: format!(
                ".ele header needs at least 2 fields, found {}",
                header.len()
            ),
        });
    }
    let count: usize = parse_field(hline, header[0], "triangle count")?;
    let per_tri: usize = parse_field(hline, header[1], "nodes per triangle")?;
    if per_tri != 3 {
        return Err(Error::Parse {
            line: hline,
            message: format!("only linear triangles are supported, nodes per triangle = {per_tri}"),
        });
    }

    let mut triangles = Vec::with_capacity(count);
    for row in 0..count {
        let (lno, fields) = lines.next_fields().ok_or(Error::Parse {
            line: 0,
            message: format!(".ele file ended after {row} of {count} rows"),
        })?;
        if fields.len() < 4 {
            return Err(Error::Parse {
                line: lno,
                message: format!(
                    "triangle row has {} fields, expected at least 4",
                    fields.len()
                ),
            });
        }
        let mut tri = [0usize; 3];
        for (slot, field) in tri.iter_mut().zip(&fields[1..4]) {
            let v: usize = parse_field(lno, field, "node reference")?;
            if v < base || v - base >= n_nodes {
                return Err(Error::Parse {
                    line: lno,
                    message: format!("node reference {v} out of range (file has {n_nodes} nodes)"),
                });
            }
            *slot = v - base;
        }
        triangles.push(tri);
    }
    Ok(triangles)
}

/// Writes the mesh in Triangle format (1-based, boundary markers included).
pub fn export_triangle(mesh: &Mesh) -> (String, String) {
    let mut node = String::new();
    node.push_str(&format!("{} 2 0 1\n", mesh.n_nodes()));
    for (k, p) in mesh.nodes().iter().enumerate() {
        let marker = if mesh.is_boundary(k) { 1 } else { 0 };
        node.push_str(&format!("{} {} {} {}\n", k + 1, p.x, p.y, marker));
    }
    let mut ele = String::new();
    ele.push_str(&format!("{} 3 0\n", mesh.n_triangles()));
    for (t, tri) in mesh.triangles().iter().enumerate() {
        ele.push_str(&format!(
            "{} {} {} {}\n",
            t + 1,
            tri[0] + 1,
            tri[1] + 1,
            tri[2] + 1
        ));
    }
    (node, ele)
}

/// Line-oriented canonical dump used by golden tests: a version header, the
/// node block (coordinates and boundary flag) and the triangle block.
pub fn canonical_dump(mesh: &Mesh) -> String {
    let mut out = String::new();
    out.push_str("meshdump 1\n");
    out.push_str(&format!("nodes {}\n", mesh.n_nodes()));
    for (k, p) in mesh.nodes().iter().enumerate() {
        let flag = if mesh.is_boundary(k) { 1 } else { 0 };
        out.push_str(&format!("{} {} {}\n", p.x, p.y, flag));
    }
    out.push_str(&format!("triangles {}\n", mesh.n_triangles()));
    for tri in mesh.triangles() {
        out.push_str(&format!("{} {} {}\n", tri[0], tri[1], tri[2]));
    }
    out
}

/// Parses the canonical dump produced by [`canonical_dump`].
pub fn parse_canonical(text: &str) -> Result<Mesh> {
    let mut lines = Lines::new(text);
    let (lno, header) = lines.next_fields().ok_or(Error::Parse {
        line: 0,
        message: "empty dump".into(),
    })?;
    if header != ["meshdump", "1"] {
        return Err(Error::Parse {
            line: lno,
            message: "expected \"meshdump 1\" header".into(),
        });
    }
    let (lno, fields) = lines.next_fields().ok_or(Error::Parse {
        line: 0,
        message: "missing node block".into(),
    })?;
    if fields.len() != 2 || fields[0] != "nodes" {
        return Err(Error::Parse {
            line: lno,
            message: "expected \"nodes <count>\"".into(),
        });
    }
    let n: usize = parse_field(lno, fields[1], "node count")?;
    let mut points = Vec::with_capacity(n);
    let mut flags = Vec::with_capacity(n);
    for _ in 0..n {
        let (lno, fields) = lines.next_fields().ok_or(Error::Parse {
            line: 0,
            message: "truncated node block".into(),
        })?;
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: lno,
                message: "node row must be \"x y flag\"".into(),
            });
        }
        points.push(Point::new(
            parse_field(lno, fields[0], "x coordinate")?,
            parse_field(lno, fields[1], "y coordinate")?,
        ));
        let flag: u8 = parse_field(lno, fields[2], "boundary flag")?;
        flags.push(flag != 0);
    }
    let (lno, fields) = lines.next_fields().ok_or(Error::Parse {
        line: 0,
        message: "missing triangle block".into(),
    })?;
    if fields.len() != 2 || fields[0] != "triangles" {
        return Err(Error::Parse {
            line: lno,
            message: "expected \"triangles <count>\"".into(),
        });
    }
    let t: usize = parse_field(lno, fields[1], "triangle count")?;
    let mut triangles = Vec::with_capacity(t);
    for _ in 0..t {
        let (lno, fields) = lines.next_fields().ok_or(Error::Parse {
            line: 0,
            message: "truncated triangle block".into(),
        })?;
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: lno,
                message: "triangle row must be \"a b c\"".into(),
            });
        }
        triangles.push([
            parse_field(lno, fields[0], "node index")?,
            parse_field(lno, fields[1], "node index")?,
            parse_field(lno, fields[2], "node index")?,
        ]);
    }
    Mesh::from_raw_with_flags(points, triangles, Some(flags))
}
