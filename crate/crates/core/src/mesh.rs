//! Quadrilateral and hexahedral meshes with labelled boundary sets.
//!
//! Plain-text format, one record per line, `#` starts a comment:
//!
//! ```text
//! dim 2
//! order 2
//! thickness 1
//! nodes <N>
//! <x> <y> <z>            (N lines)
//! elements <M>
//! <material> <n0> <n1> ...  (M lines, (order+1)^dim nodes each, lexicographic)
//! nodeset <name> <K>
//! <id> <id> ...          (K ids, any line breaks)
//! facetset <name> <K>
//! <element> <face>       (K lines; face 2c is ξ_c = -1, 2c+1 is ξ_c = +1)
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fem::basis::LagrangeBasis;
use crate::fem::quadrature::QuadratureRule;

/// Boundary facet: local face `face` of element `element`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Facet {
    pub element: usize,
    pub face: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub dim: usize,
    pub order: usize,
    /// Out-of-plane thickness for two-dimensional meshes; scales volume and boundary integrals.
    pub thickness: f64,
    pub nodes: Vec<[f64; 3]>,
    pub conn: Vec<usize>,
    pub material: Vec<usize>,
    pub node_sets: BTreeMap<String, Vec<usize>>,
    pub facet_sets: BTreeMap<String, Vec<Facet>>,
}

impl Mesh {
    pub fn basis(&self) -> LagrangeBasis {
        LagrangeBasis::new(self.dim, self.order)
    }

    pub fn nodes_per_element(&self) -> usize {
        (self.order + 1).pow(self.dim as u32)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.material.len()
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let m = self.nodes_per_element();
        &self.conn[e * m..(e + 1) * m]
    }

    pub fn facet_nodes(&self, f: Facet) -> Vec<usize> {
        let el = self.element(f.element);
        self.basis().face_nodes(f.face).into_iter().map(|a| el[a]).collect()
    }

    pub fn node_set(&self, name: &str) -> Result<&[usize]> {
        self.node_sets.get(name).map(|v| v.as_slice()).ok_or_else(|| Error::UnknownSet(name.to_string()))
    }

    pub fn facet_set(&self, name: &str) -> Result<&[Facet]> {
        self.facet_sets.get(name).map(|v| v.as_slice()).ok_or_else(|| Error::UnknownSet(name.to_string()))
    }

    /// Adds node sets for every facet set that has no node set of the same name.
    pub fn derive_node_sets(&mut self) {
        let names: Vec<String> = self.facet_sets.keys().filter(|k| !self.node_sets.contains_key(*k)).cloned().collect();
        for name in names {
            let mut ids: Vec<usize> = self.facet_sets[&name].iter().flat_map(|f| self.facet_nodes(*f)).collect();
            ids.sort_unstable();
            ids.dedup();
            self.node_sets.insert(name, ids);
        }
    }

    /// Structured mesh of `[0,1]^dim` with `n[c]` elements per direction,
    /// mapped through `map`. Boundary sets are named `left`/`right`
    /// (first coordinate), `bottom`/`top` (second) and `back`/`front` (third).
    pub fn structured(dim: usize, order: usize, n: [usize; 3], map: impl Fn([f64; 3]) -> [f64; 3]) -> Result<Self> {
        if !(2..=3).contains(&dim) || !(1..=2).contains(&order) {
            return Err(Error::InvalidMesh(format!("unsupported dim {dim} / order {order}")));
        }
        let ne = [n[0], n[1], if dim == 3 { n[2] } else { 1 }];
        if ne.iter().take(dim).any(|&k| k == 0) {
            return Err(Error::InvalidMesh("zero elements in a direction".into()));
        }
        let m = [ne[0] * order + 1, ne[1] * order + 1, if dim == 3 { ne[2] * order + 1 } else { 1 }];
        let id = |i: usize, j: usize, k: usize| i + m[0] * (j + m[1] * k);
        let mut nodes = Vec::with_capacity(m[0] * m[1] * m[2]);
        for k in 0..m[2] {
            for j in 0..m[1] {
                for i in 0..m[0] {
                    let s = [
                        i as f64 / (m[0] - 1) as f64,
                        j as f64 / (m[1] - 1) as f64,
                        if dim == 3 { k as f64 / (m[2] - 1) as f64 } else { 0.0 },
                    ];
                    nodes.push(map(s));
                }
            }
        }
        let basis = LagrangeBasis::new(dim, order);
        let mut conn = Vec::new();
        let mut facet_sets: BTreeMap<String, Vec<Facet>> = BTreeMap::new();
        let names = ["left", "right", "bottom", "top", "back", "front"];
        let mut e = 0;
        for ek in 0..ne[2] {
            for ej in 0..ne[1] {
                for ei in 0..ne[0] {
                    for a in 0..basis.n_nodes() {
                        let ix = basis.node_index(a);
                        conn.push(id(ei * order + ix[0], ej * order + ix[1], ek * order + ix[2]));
                    }
                    let pos = [ei, ej, ek];
                    for c in 0..dim {
                        if pos[c] == 0 {
                            facet_sets.entry(names[2 * c].into()).or_default().push(Facet { element: e, face: 2 * c });
                        }
                        if pos[c] + 1 == ne[c] {
                            facet_sets.entry(names[2 * c + 1].into()).or_default().push(Facet { element: e, face: 2 * c + 1 });
                        }
                    }
                    e += 1;
                }
            }
        }
        let mut mesh = Mesh {
            dim,
            order,
            thickness: 1.0,
            nodes,
            conn,
            material: vec![0; e],
            node_sets: BTreeMap::new(),
            facet_sets,
        };
        mesh.derive_node_sets();
        Ok(mesh)
    }

    /// Checks connectivity bounds, set references and positive Jacobians at
    /// every Gauss point of the `(order+1)^dim` rule.
    pub fn validate(&self) -> Result<()> {
        let nn = self.nodes_per_element();
        if self.conn.len() != nn * self.n_elements() {
            return Err(Error::InvalidMesh("connectivity length does not match element count".into()));
        }
        if let Some(&bad) = self.conn.iter().find(|&&i| i >= self.n_nodes()) {
            return Err(Error::InvalidMesh(format!("node index {bad} out of range")));
        }
        for (name, ids) in &self.node_sets {
            if ids.iter().any(|&i| i >= self.n_nodes()) {
                return Err(Error::InvalidMesh(format!("node set '{name}' references a missing node")));
            }
        }
        for (name, fs) in &self.facet_sets {
            if fs.iter().any(|f| f.element >= self.n_elements() || f.face >= 2 * self.dim) {
                return Err(Error::InvalidMesh(format!("facet set '{name}' references a missing facet")));
            }
        }
        let rule = QuadratureRule::tensor(self.dim, self.order + 1);
        for e in 0..self.n_elements() {
            for xi in &rule.points {
                let d = self.jacobian_det(e, *xi);
                if !(d > 0.0) {
                    return Err(Error::InvertedElement { det: d });
                }
            }
        }
        Ok(())
    }

    /// Jacobian of the isoparametric map of element `e` at `xi`.
    pub fn jacobian(&self, e: usize, xi: [f64; 3]) -> [[f64; 3]; 3] {
        let b = self.basis();
        let nn = b.n_nodes();
        let mut n = vec![0.0; nn];
        let mut dn = vec![[0.0; 3]; nn];
        b.eval(xi, &mut n, &mut dn);
        let mut jac = [[0.0; 3]; 3];
        for (a, &node) in self.element(e).iter().enumerate() {
            let x = self.nodes[node];
            for i in 0..self.dim {
                for c in 0..self.dim {
                    jac[i][c] += x[i] * dn[a][c];
                }
            }
        }
        jac
    }

    fn jacobian_det(&self, e: usize, xi: [f64; 3]) -> f64 {
        let j = self.jacobian(e, xi);
        if self.dim == 2 {
            j[0][0] * j[1][1] - j[0][1] * j[1][0]
        } else {
            j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1]) - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
                + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0])
        }
    }

    /// Reference volume (area times thickness in 2D).
    pub fn volume(&self) -> f64 {
        let rule = QuadratureRule::tensor(self.dim, self.order + 1);
        let scale = if self.dim == 2 { self.thickness } else { 1.0 };
        (0..self.n_elements())
            .map(|e| rule.points.iter().zip(&rule.weights).map(|(xi, w)| w * self.jacobian_det(e, *xi)).sum::<f64>())
            .sum::<f64>()
            * scale
    }

    /// Volume of each element without the thickness factor.
    pub fn element_measures(&self) -> Vec<f64> {
        let rule = QuadratureRule::tensor(self.dim, self.order + 1);
        (0..self.n_elements())
            .map(|e| rule.points.iter().zip(&rule.weights).map(|(xi, w)| w * self.jacobian_det(e, *xi)).sum())
            .collect()
    }

    /// Reference centroid of each element (image of the reference origin).
    pub fn element_centroids(&self) -> Vec<[f64; 3]> {
        let b = self.basis();
        let nn = b.n_nodes();
        let mut n = vec![0.0; nn];
        let mut dn = vec![[0.0; 3]; nn];
        b.eval([0.0; 3], &mut n, &mut dn);
        (0..self.n_elements())
            .map(|e| {
                let mut x = [0.0; 3];
                for (a, &node) in self.element(e).iter().enumerate() {
                    for c in 0..3 {
                        x[c] += n[a] * self.nodes[node][c];
                    }
                }
                x
            })
            .collect()
    }

    /// Surface measure of a facet set (length times thickness in 2D).
    pub fn facet_set_measure(&self, name: &str) -> Result<f64> {
        let fs = self.facet_set(name)?;
        let mut total = 0.0;
        for f in fs {
            total += self.facet_quadrature(*f).iter().map(|(_, _, da)| da).sum::<f64>();
        }
        Ok(total)
    }

    /// Quadrature on a facet: `(reference point, shape values, dA)` per point,
    /// including the thickness factor in 2D.
    pub fn facet_quadrature(&self, f: Facet) -> Vec<([f64; 3], Vec<f64>, f64)> {
        let b = self.basis();
        let axes = b.face_axes(f.face);
        let rule = QuadratureRule::tensor(self.dim - 1, self.order + 1);
        let nn = b.n_nodes();
        let mut out = Vec::with_capacity(rule.len());
        let c = f.face / 2;
        let fixed = if f.face % 2 == 0 { -1.0 } else { 1.0 };
        for (q, w) in rule.points.iter().zip(&rule.weights) {
            let mut xi = [0.0; 3];
            xi[c] = fixed;
            for (s, &ax) in axes.iter().enumerate() {
                xi[ax] = q[s];
            }
            let mut n = vec![0.0; nn];
            let mut dn = vec![[0.0; 3]; nn];
            b.eval(xi, &mut n, &mut dn);
            let jac = self.jacobian(f.element, xi);
            let t: Vec<[f64; 3]> = axes.iter().map(|&ax| [jac[0][ax], jac[1][ax], jac[2][ax]]).collect();
            let da = if self.dim == 2 {
                (t[0][0] * t[0][0] + t[0][1] * t[0][1]).sqrt() * self.thickness
            } else {
                let cr = [
                    t[0][1] * t[1][2] - t[0][2] * t[1][1],
                    t[0][2] * t[1][0] - t[0][0] * t[1][2],
                    t[0][0] * t[1][1] - t[0][1] * t[1][0],
                ];
                (cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]).sqrt()
            };
            out.push((xi, n, w * da));
        }
        out
    }

    /// Index of the node closest to `x`.
    pub fn nearest_node(&self, x: [f64; 3]) -> usize {
        let d2 = |p: &[f64; 3]| (0..3).map(|c| (p[c] - x[c]).powi(2)).sum::<f64>();
        (0..self.n_nodes()).min_by(|&a, &b| d2(&self.nodes[a]).total_cmp(&d2(&self.nodes[b]))).unwrap_or(0)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dim {}\norder {}\nthickness {:e}", self.dim, self.order, self.thickness);
        let _ = writeln!(s, "nodes {}", self.n_nodes());
        for x in &self.nodes {
            let _ = writeln!(s, "{:e} {:e} {:e}", x[0], x[1], x[2]);
        }
        let _ = writeln!(s, "elements {}", self.n_elements());
        for e in 0..self.n_elements() {
            let _ = write!(s, "{}", self.material[e]);
            for n in self.element(e) {
                let _ = write!(s, " {n}");
            }
            s.push('\n');
        }
        for (name, ids) in &self.node_sets {
            let _ = writeln!(s, "nodeset {name} {}", ids.len());
            for chunk in ids.chunks(16) {
                let line: Vec<String> = chunk.iter().map(|i| i.to_string()).collect();
                let _ = writeln!(s, "{}", line.join(" "));
            }
        }
        for (name, fs) in &self.facet_sets {
            let _ = writeln!(s, "facetset {name} {}", fs.len());
            for f in fs {
                let _ = writeln!(s, "{} {}", f.element, f.face);
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty())
            .peekable();
        let err = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };
        let mut header = |key: &str| -> Result<(usize, String)> {
            let (ln, l) = lines.next().ok_or_else(|| err(0, &format!("missing '{key}'")))?;
            let mut it = l.split_whitespace();
            if it.next() != Some(key) {
                return Err(err(ln, &format!("expected '{key}'")));
            }
            Ok((ln, it.collect::<Vec<_>>().join(" ")))
        };
        let num = |ln: usize, s: &str| -> Result<usize> { s.parse().map_err(|_| err(ln, &format!("bad integer '{s}'"))) };
        let flt = |ln: usize, s: &str| -> Result<f64> { s.parse().map_err(|_| err(ln, &format!("bad number '{s}'"))) };

        let (ln, v) = header("dim")?;
        let dim = num(ln, &v)?;
        let (ln, v) = header("order")?;
        let order = num(ln, &v)?;
        let (ln, v) = header("thickness")?;
        let thickness = flt(ln, &v)?;
        let (ln, v) = header("nodes")?;
        let nn = num(ln, &v)?;
        if !(2..=3).contains(&dim) || !(1..=2).contains(&order) {
            return Err(err(ln, "unsupported dim/order"));
        }
        drop(header);
        let mut nodes = Vec::with_capacity(nn);
        for _ in 0..nn {
            let (ln, l) = lines.next().ok_or_else(|| err(0, "truncated node list"))?;
            let v: Vec<&str> = l.split_whitespace().collect();
            if v.len() != 3 {
                return Err(err(ln, "node needs three coordinates"));
            }
            nodes.push([flt(ln, v[0])?, flt(ln, v[1])?, flt(ln, v[2])?]);
        }
        let (ln, l) = lines.next().ok_or_else(|| err(0, "missing 'elements'"))?;
        let ne = match l.split_whitespace().collect::<Vec<_>>()[..] {
            ["elements", k] => num(ln, k)?,
            _ => return Err(err(ln, "expected 'elements'")),
        };
        let per = (order + 1).pow(dim as u32);
        let mut conn = Vec::with_capacity(ne * per);
        let mut material = Vec::with_capacity(ne);
        for _ in 0..ne {
            let (ln, l) = lines.next().ok_or_else(|| err(0, "truncated element list"))?;
            let v: Vec<&str> = l.split_whitespace().collect();
            if v.len() != per + 1 {
                return Err(err(ln, &format!("element needs a material id and {per} nodes")));
            }
            material.push(num(ln, v[0])?);
            for s in &v[1..] {
                conn.push(num(ln, s)?);
            }
        }
        let mut node_sets = BTreeMap::new();
        let mut facet_sets = BTreeMap::new();
        while let Some((ln, l)) = lines.next() {
            let v: Vec<&str> = l.split_whitespace().collect();
            match v[..] {
                ["nodeset", name, k] => {
                    let k = num(ln, k)?;
                    let mut ids = Vec::with_capacity(k);
                    while ids.len() < k {
                        let (ln, l) = lines.next().ok_or_else(|| err(ln, "truncated node set"))?;
                        for s in l.split_whitespace() {
                            ids.push(num(ln, s)?);
                        }
                    }
                    if ids.len() != k {
                        return Err(err(ln, "node set length mismatch"));
                    }
                    node_sets.insert(name.to_string(), ids);
                }
                ["facetset", name, k] => {
                    let k = num(ln, k)?;
                    let mut fs = Vec::with_capacity(k);
                    for _ in 0..k {
                        let (ln, l) = lines.next().ok_or_else(|| err(ln, "truncated facet set"))?;
                        match l.split_whitespace().collect::<Vec<_>>()[..] {
                            [e, f] => fs.push(Facet { element: num(ln, e)?, face: num(ln, f)? }),
                            _ => return Err(err(ln, "facet needs element and face")),
                        }
                    }
                    facet_sets.insert(name.to_string(), fs);
                }
                _ => return Err(err(ln, "expected 'nodeset' or 'facetset'")),
            }
        }
        let mut mesh = Mesh { dim, order, thickness, nodes, conn, material, node_sets, facet_sets };
        mesh.validate()?;
        mesh.derive_node_sets();
        Ok(mesh)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn skewed(s: [f64; 3]) -> [f64; 3] {
        [2.0 * s[0] + 0.3 * s[1], s[1] + 0.2 * s[0], s[2] * 0.5]
    }

    #[test]
    fn structured_counts_and_sets() {
        let m = Mesh::structured(2, 2, [3, 2, 0], skewed).unwrap();
        assert_eq!(m.n_nodes(), 7 * 5);
        assert_eq!(m.n_elements(), 6);
        assert_eq!(m.facet_set("left").unwrap().len(), 2);
        assert_eq!(m.facet_set("top").unwrap().len(), 3);
        assert_eq!(m.node_set("left").unwrap().len(), 5);
        assert!(m.facet_set("front").is_err());
        m.validate().unwrap();
        let h = Mesh::structured(3, 1, [2, 2, 1], skewed).unwrap();
        assert_eq!(h.n_nodes(), 18);
        assert_eq!(h.node_set("front").unwrap().len(), 9);
        h.validate().unwrap();
    }

    #[test]
    fn volume_and_facet_measures_of_affine_map() {
        // Parallelogram with edges (2, 0.2) and (0.3, 1): area 1.94.
        for order in 1..=2 {
            let m = Mesh::structured(2, order, [3, 4, 0], skewed).unwrap();
            assert!((m.volume() - 1.94).abs() < 1e-13);
            assert!((m.facet_set_measure("left").unwrap() - (0.09f64 + 1.0).sqrt()).abs() < 1e-13);
            let h = Mesh::structured(3, order, [2, 2, 2], skewed).unwrap();
            assert!((h.volume() - 0.97).abs() < 1e-13);
            assert!((h.facet_set_measure("back").unwrap() - 1.94).abs() < 1e-13);
        }
    }

    #[test]
    fn text_round_trip() {
        let mut m = Mesh::structured(2, 2, [2, 2, 0], skewed).unwrap();
        m.material[1] = 3;
        m.thickness = 0.25;
        let back = Mesh::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
        let h = Mesh::structured(3, 1, [1, 2, 1], skewed).unwrap();
        assert_eq!(Mesh::from_text(&h.to_text()).unwrap(), h);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "dim 2\norder 1\nthickness 1\nnodes 1\n0 0\n";
        match Mesh::from_text(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inverted_element_rejected() {
        let m = Mesh::structured(2, 1, [1, 1, 0], |s| [1.0 - s[0], s[1], 0.0]).unwrap();
        assert!(matches!(m.validate(), Err(Error::InvertedElement { .. })));
    }
}
