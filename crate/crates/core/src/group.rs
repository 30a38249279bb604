//! Group elements, group laws and finite subset algebra.
//!
//! Every group kind has a canonical element order: index order for finite
//! kinds, (max-norm, lexicographic) for lattices and (length, lexicographic
//! with a < A < b < B < ...) for free groups. Greedy algorithms downstream
//! rely on it for reproducibility.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Caps, Error, Result};

/// A group element in normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Element {
    /// Index into a finite group, identity at 0.
    Finite(u32),
    /// Vector in Z^d.
    Lattice(Vec<i64>),
    /// Reduced word; letter `i > 0` is generator i, `-i` its inverse.
    Free(Vec<i32>),
}

fn letter_key(l: i32) -> i32 {
    (l.abs() - 1) * 2 + i32::from(l < 0)
}

fn max_norm(v: &[i64]) -> i64 {
    v.iter().map(|c| c.abs()).max().unwrap_or(0)
}

impl Ord for Element {
    fn cmp(&self, other: &Self) -> Ordering {
        use Element::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.cmp(b),
            (Lattice(a), Lattice(b)) => max_norm(a).cmp(&max_norm(b)).then_with(|| a.cmp(b)),
            (Free(a), Free(b)) => a
                .len()
                .cmp(&b.len())
                .then_with(|| a.iter().map(|&l| letter_key(l)).cmp(b.iter().map(|&l| letter_key(l)))),
            (Finite(_), _) => Ordering::Less,
            (Lattice(_), Finite(_)) => Ordering::Greater,
            (Lattice(_), Free(_)) => Ordering::Less,
            (Free(_), _) => Ordering::Greater,
        }
    }
}

impl PartialOrd for Element {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Element {
    /// Index of a finite-group element.
    pub fn index(&self) -> usize {
        match self {
            Element::Finite(i) => *i as usize,
            _ => panic!("index() on an element of an infinite group"),
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Finite(i) => write!(f, "{i}"),
            Element::Lattice(v) => {
                let parts: Vec<String> = v.iter().map(|c| c.to_string()).collect();
                write!(f, "({})", parts.join(","))
            }
            Element::Free(w) => write!(f, "{}", word_string(w)),
        }
    }
}

fn word_string(w: &[i32]) -> String {
    if w.is_empty() {
        return "1".to_string();
    }
    w.iter()
        .map(|&l| {
            let c = (b'a' + (l.unsigned_abs() - 1) as u8) as char;
            if l < 0 {
                c.to_ascii_uppercase()
            } else {
                c
            }
        })
        .collect()
}

/// Serializable description of a group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GroupDescriptor {
    Cyclic { n: u32 },
    Dihedral { n: u32 },
    Product { factors: Vec<GroupDescriptor> },
    Lattice { d: usize },
    Free { rank: usize },
    Table { mul: Vec<Vec<u32>> },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Kind {
    Cyclic(u32),
    Dihedral(u32),
    Product(Vec<Group>),
    Lattice(usize),
    Free(usize),
    Table(Vec<Vec<u32>>),
}

/// A finite group or a finitely generated group with solvable word problem.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Group {
    kind: Kind,
    order: Option<u32>,
}

pub type GroupRef = Arc<Group>;

impl Group {
    pub fn cyclic(n: u32) -> GroupRef {
        assert!(n >= 1, "cyclic group needs n >= 1");
        Arc::new(Group { kind: Kind::Cyclic(n), order: Some(n) })
    }

    /// Dihedral group of order 2n; element r^i s^j has index j*n + i.
    pub fn dihedral(n: u32) -> GroupRef {
        assert!(n >= 1, "dihedral group needs n >= 1");
        Arc::new(Group { kind: Kind::Dihedral(n), order: Some(2 * n) })
    }

    /// Direct product of finite groups, first factor most significant.
    pub fn product(factors: &[GroupRef]) -> Result<GroupRef> {
        let mut order: u64 = 1;
        for f in factors {
            let o = f.order.ok_or(Error::InfiniteGroup)?;
            order *= o as u64;
            if order > u32::MAX as u64 {
                return Err(Error::BadDescriptor("product order overflows".into()));
            }
        }
        Ok(Arc::new(Group {
            kind: Kind::Product(factors.iter().map(|f| (**f).clone()).collect()),
            order: Some(order as u32),
        }))
    }

    pub fn lattice(d: usize) -> GroupRef {
        Arc::new(Group { kind: Kind::Lattice(d), order: None })
    }

    pub fn free(rank: usize) -> GroupRef {
        assert!(rank <= 26, "free group rank above 26 has no letter encoding");
        Arc::new(Group { kind: Kind::Free(rank), order: None })
    }

    /// Finite group from a Cayley table; identity must be index 0.
    pub fn table(mul: Vec<Vec<u32>>) -> Result<GroupRef> {
        let n = mul.len();
        if n == 0 {
            return Err(Error::BadDescriptor("empty table".into()));
        }
        for (i, row) in mul.iter().enumerate() {
            if row.len() != n {
                return Err(Error::BadDescriptor(format!("row {i} has wrong length")));
            }
            let mut seen = vec![false; n];
            for &v in row {
                if v as usize >= n || seen[v as usize] {
                    return Err(Error::BadDescriptor(format!("row {i} is not a permutation")));
                }
                seen[v as usize] = true;
            }
        }
        for (i, row) in mul.iter().enumerate() {
            if mul[0][i] as usize != i || row[0] as usize != i {
                return Err(Error::BadDescriptor("index 0 is not the identity".into()));
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = mul[a][b] as usize;
                for c in 0..n {
                    if mul[ab][c] != mul[a][mul[b][c] as usize] {
                        return Err(Error::BadDescriptor(format!("table not associative at ({a},{b},{c})")));
                    }
                }
            }
        }
        Ok(Arc::new(Group { kind: Kind::Table(mul), order: Some(n as u32) }))
    }

    pub fn from_descriptor(d: &GroupDescriptor) -> Result<GroupRef> {
        Ok(match d {
            GroupDescriptor::Cyclic { n } if *n >= 1 => Group::cyclic(*n),
            GroupDescriptor::Dihedral { n } if *n >= 1 => Group::dihedral(*n),
            GroupDescriptor::Cyclic { .. } | GroupDescriptor::Dihedral { .. } => {
                return Err(Error::BadDescriptor("n must be positive".into()))
            }
            GroupDescriptor::Product { factors } => {
                let fs = factors.iter().map(Group::from_descriptor).collect::<Result<Vec<_>>>()?;
                Group::product(&fs)?
            }
            GroupDescriptor::Lattice { d } => Group::lattice(*d),
            GroupDescriptor::Free { rank } if *rank <= 26 => Group::free(*rank),
            GroupDescriptor::Free { .. } => return Err(Error::BadDescriptor("free rank above 26".into())),
            GroupDescriptor::Table { mul } => Group::table(mul.clone())?,
        })
    }

    pub fn descriptor(&self) -> GroupDescriptor {
        match &self.kind {
            Kind::Cyclic(n) => GroupDescriptor::Cyclic { n: *n },
            Kind::Dihedral(n) => GroupDescriptor::Dihedral { n: *n },
            Kind::Product(fs) => GroupDescriptor::Product { factors: fs.iter().map(|f| f.descriptor()).collect() },
            Kind::Lattice(d) => GroupDescriptor::Lattice { d: *d },
            Kind::Free(r) => GroupDescriptor::Free { rank: *r },
            Kind::Table(t) => GroupDescriptor::Table { mul: t.clone() },
        }
    }

    /// Order, or `None` for infinite groups.
    pub fn order(&self) -> Option<u32> {
        self.order
    }

    pub fn is_finite(&self) -> bool {
        self.order.is_some()
    }

    pub fn finite_order(&self) -> Result<usize> {
        self.order.map(|o| o as usize).ok_or(Error::InfiniteGroup)
    }

    pub fn identity(&self) -> Element {
        match &self.kind {
            Kind::Lattice(d) => Element::Lattice(vec![0; *d]),
            Kind::Free(_) => Element::Free(Vec::new()),
            _ => Element::Finite(0),
        }
    }

    pub fn is_identity(&self, g: &Element) -> bool {
        *g == self.identity()
    }

    pub fn contains(&self, g: &Element) -> bool {
        match (&self.kind, g) {
            (Kind::Lattice(d), Element::Lattice(v)) => v.len() == *d,
            (Kind::Free(r), Element::Free(w)) => {
                w.iter().all(|&l| l != 0 && l.unsigned_abs() as usize <= *r) && w.windows(2).all(|p| p[0] != -p[1])
            }
            (Kind::Lattice(_), _) | (Kind::Free(_), _) => false,
            (_, Element::Finite(i)) => *i < self.order.unwrap_or(0),
            _ => false,
        }
    }

    fn check(&self, g: &Element) -> Result<()> {
        if self.contains(g) {
            Ok(())
        } else {
            Err(Error::NotAnElement(g.to_string()))
        }
    }

    /// Product of two finite-group indices.
    pub fn mul_idx(&self, a: u32, b: u32) -> u32 {
        match &self.kind {
            Kind::Cyclic(n) => ((a as u64 + b as u64) % *n as u64) as u32,
            Kind::Dihedral(n) => {
                let (ai, aj) = (a % n, a / n);
                let (bi, bj) = (b % n, b / n);
                let i = if aj == 0 { (ai + bi) % n } else { (ai + n - bi) % n };
                ((aj + bj) % 2) * n + i
            }
            Kind::Product(fs) => {
                let (xa, xb) = (self.split(a), self.split(b));
                let parts: Vec<u32> =
                    fs.iter().zip(xa.iter().zip(xb.iter())).map(|(f, (&u, &v))| f.mul_idx(u, v)).collect();
                self.join(&parts)
            }
            Kind::Table(t) => t[a as usize][b as usize],
            _ => panic!("mul_idx on an infinite group"),
        }
    }

    pub fn inv_idx(&self, a: u32) -> u32 {
        match &self.kind {
            Kind::Cyclic(n) => (n - a % n) % n,
            Kind::Dihedral(n) => {
                if a < *n {
                    (n - a) % n
                } else {
                    a
                }
            }
            Kind::Product(fs) => {
                let parts: Vec<u32> = fs.iter().zip(self.split(a)).map(|(f, u)| f.inv_idx(u)).collect();
                self.join(&parts)
            }
            Kind::Table(t) => t[a as usize].iter().position(|&v| v == 0).unwrap() as u32,
            _ => panic!("inv_idx on an infinite group"),
        }
    }

    /// Mixed-radix coordinates of a product element.
    pub fn split(&self, a: u32) -> Vec<u32> {
        match &self.kind {
            Kind::Product(fs) => {
                let mut out = vec![0; fs.len()];
                let mut rest = a;
                for (i, f) in fs.iter().enumerate().rev() {
                    let o = f.order.unwrap();
                    out[i] = rest % o;
                    rest /= o;
                }
                out
            }
            _ => vec![a],
        }
    }

    pub fn join(&self, parts: &[u32]) -> u32 {
        match &self.kind {
            Kind::Product(fs) => fs.iter().zip(parts).fold(0, |acc, (f, &p)| acc * f.order.unwrap() + p),
            _ => parts[0],
        }
    }

    pub fn mul(&self, g: &Element, h: &Element) -> Result<Element> {
        self.check(g)?;
        self.check(h)?;
        Ok(self.mul_unchecked(g, h))
    }

    pub(crate) fn mul_unchecked(&self, g: &Element, h: &Element) -> Element {
        match (g, h) {
            (Element::Finite(a), Element::Finite(b)) => Element::Finite(self.mul_idx(*a, *b)),
            (Element::Lattice(u), Element::Lattice(v)) => {
                Element::Lattice(u.iter().zip(v).map(|(x, y)| x + y).collect())
            }
            (Element::Free(u), Element::Free(v)) => {
                let mut w = u.clone();
                for &l in v {
                    if w.last() == Some(&-l) {
                        w.pop();
                    } else {
                        w.push(l);
                    }
                }
                Element::Free(w)
            }
            _ => panic!("mixed element kinds"),
        }
    }

    pub fn inv(&self, g: &Element) -> Element {
        match g {
            Element::Finite(a) => Element::Finite(self.inv_idx(*a)),
            Element::Lattice(v) => Element::Lattice(v.iter().map(|x| -x).collect()),
            Element::Free(w) => Element::Free(w.iter().rev().map(|l| -l).collect()),
        }
    }

    /// g h g^-1
    pub fn conjugate(&self, g: &Element, h: &Element) -> Element {
        self.mul_unchecked(&self.mul_unchecked(g, h), &self.inv(g))
    }

    /// Standard generating set.
    pub fn generators(&self) -> Vec<Element> {
        match &self.kind {
            Kind::Cyclic(n) => {
                if *n > 1 {
                    vec![Element::Finite(1)]
                } else {
                    vec![]
                }
            }
            Kind::Dihedral(n) => {
                let mut v = vec![Element::Finite(*n)];
                if *n > 1 {
                    v.insert(0, Element::Finite(1));
                }
                v
            }
            Kind::Product(fs) => {
                let mut out = Vec::new();
                for (i, f) in fs.iter().enumerate() {
                    for g in f.generators() {
                        let mut parts = vec![0; fs.len()];
                        parts[i] = g.index() as u32;
                        out.push(Element::Finite(self.join(&parts)));
                    }
                }
                out
            }
            Kind::Lattice(d) => (0..*d)
                .map(|i| {
                    let mut v = vec![0; *d];
                    v[i] = 1;
                    Element::Lattice(v)
                })
                .collect(),
            Kind::Free(r) => (1..=*r as i32).map(|i| Element::Free(vec![i])).collect(),
            Kind::Table(t) => (1..t.len() as u32).map(Element::Finite).collect(),
        }
    }

    /// All elements of a finite group in canonical order.
    pub fn elements(&self) -> Result<Vec<Element>> {
        let n = self.order.ok_or(Error::InfiniteGroup)?;
        Ok((0..n).map(Element::Finite).collect())
    }

    /// Canonical enumeration, identity first. Infinite for infinite groups.
    pub fn canonical_iter(&self) -> CanonicalIter<'_> {
        CanonicalIter { group: self, radius: 0, layer: VecDeque::new(), next_index: 0 }
    }

    /// First `count` non-identity elements in canonical order.
    pub fn enumerate_nonidentity(&self, count: usize) -> Result<Vec<Element>> {
        if let Some(n) = self.order {
            if count + 1 > n as usize {
                return Err(Error::Precondition(format!(
                    "asked for {count} non-identity elements of a group of order {n}"
                )));
            }
        }
        Ok(self.canonical_iter().skip(1).take(count).collect())
    }

    /// Encode an element as JSON: integer, integer vector or generator word.
    pub fn encode(&self, g: &Element) -> Value {
        match g {
            Element::Finite(i) => Value::from(*i),
            Element::Lattice(v) => Value::from(v.clone()),
            Element::Free(w) => Value::from(word_string(w)),
        }
    }

    pub fn decode(&self, v: &Value) -> Result<Element> {
        let bad = || Error::Parse(format!("cannot decode element {v}"));
        let e = match &self.kind {
            Kind::Lattice(_) => Element::Lattice(
                v.as_array().ok_or_else(bad)?.iter().map(|c| c.as_i64().ok_or_else(bad)).collect::<Result<_>>()?,
            ),
            Kind::Free(_) => {
                let s = v.as_str().ok_or_else(bad)?;
                self.parse_word(s)?
            }
            _ => Element::Finite(u32::try_from(v.as_u64().ok_or_else(bad)?).map_err(|_| bad())?),
        };
        self.check(&e)?;
        Ok(e)
    }

    /// Parse a free-group word such as "aB"; "1" is the identity. The result is reduced.
    pub fn parse_word(&self, s: &str) -> Result<Element> {
        if s == "1" || s.is_empty() {
            return Ok(Element::Free(Vec::new()));
        }
        let mut acc = Element::Free(Vec::new());
        for c in s.chars() {
            if !c.is_ascii_alphabetic() {
                return Err(Error::Parse(format!("bad letter {c:?} in word {s:?}")));
            }
            let g = (c.to_ascii_lowercase() as u8 - b'a') as i32 + 1;
            let l = if c.is_ascii_uppercase() { -g } else { g };
            acc = self.mul_unchecked(&acc, &Element::Free(vec![l]));
        }
        self.check(&acc)?;
        Ok(acc)
    }

    /// Subgroup generated by `gens` (finite groups), as a sorted index list.
    pub fn generated_subgroup(&self, gens: &[u32]) -> Result<Vec<u32>> {
        let n = self.finite_order()?;
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut elems = vec![0u32];
        let mut i = 0;
        while i < elems.len() {
            let x = elems[i];
            for &g in gens {
                let y = self.mul_idx(x, g);
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    elems.push(y);
                }
            }
            i += 1;
        }
        elems.sort_unstable();
        Ok(elems)
    }

    /// All subgroups of a finite group, sorted by (size, elements).
    pub fn subgroups(self: &GroupRef, caps: &Caps) -> Result<Vec<GroupSubset>> {
        let n = self.finite_order()?;
        Caps::check("subgroup enumeration order", n as u128, caps.subgroup_order)?;
        let mut found: HashSet<Vec<u32>> = HashSet::new();
        let mut queue: VecDeque<(Vec<u32>, Vec<u32>)> = VecDeque::new();
        found.insert(vec![0]);
        queue.push_back((vec![0], vec![]));
        while let Some((elems, gens)) = queue.pop_front() {
            let mut member = vec![false; n];
            for &e in &elems {
                member[e as usize] = true;
            }
            for g in 0..n as u32 {
                if member[g as usize] {
                    continue;
                }
                let mut ng = gens.clone();
                ng.push(g);
                let sub = self.generated_subgroup(&ng)?;
                if found.insert(sub.clone()) {
                    queue.push_back((sub, ng));
                }
            }
        }
        let mut all: Vec<Vec<u32>> = found.into_iter().collect();
        all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Ok(all.into_iter().map(|s| GroupSubset::from_indices(self, s)).collect())
    }

    /// Subgroups invariant under conjugation.
    pub fn normal_subgroups(self: &GroupRef, caps: &Caps) -> Result<Vec<GroupSubset>> {
        let subs = self.subgroups(caps)?;
        Ok(subs.into_iter().filter(|h| h.is_normal()).collect())
    }
}

/// Canonical-order enumeration of group elements.
pub struct CanonicalIter<'a> {
    group: &'a Group,
    radius: u32,
    layer: VecDeque<Element>,
    next_index: u32,
}

impl Iterator for CanonicalIter<'_> {
    type Item = Element;

    fn next(&mut self) -> Option<Element> {
        if let Some(n) = self.group.order {
            if self.next_index >= n {
                return None;
            }
            self.next_index += 1;
            return Some(Element::Finite(self.next_index - 1));
        }
        loop {
            if let Some(e) = self.layer.pop_front() {
                return Some(e);
            }
            self.layer = self.group.sphere(self.radius).into();
            self.radius += 1;
            if self.layer.is_empty() && self.radius > 1 {
                // rank-0 free group or Z^0
                return None;
            }
        }
    }
}

impl Group {
    /// Elements at canonical radius r, in canonical order (infinite kinds only).
    fn sphere(&self, r: u32) -> Vec<Element> {
        match &self.kind {
            Kind::Lattice(d) => {
                let r = r as i64;
                let mut out = Vec::new();
                let mut v = vec![-r; *d];
                if *d == 0 {
                    return if r == 0 { vec![Element::Lattice(vec![])] } else { vec![] };
                }
                loop {
                    if max_norm(&v) == r {
                        out.push(Element::Lattice(v.clone()));
                    }
                    let mut i = *d;
                    loop {
                        if i == 0 {
                            return out;
                        }
                        i -= 1;
                        if v[i] < r {
                            v[i] += 1;
                            for c in v.iter_mut().skip(i + 1) {
                                *c = -r;
                            }
                            break;
                        }
                    }
                }
            }
            Kind::Free(rank) => {
                let mut letters: Vec<i32> = (1..=*rank as i32).flat_map(|g| [g, -g]).collect();
                letters.sort_by_key(|&l| letter_key(l));
                let mut words = vec![Vec::new()];
                for _ in 0..r {
                    let mut next = Vec::new();
                    for w in &words {
                        for &l in &letters {
                            if w.last() != Some(&-l) {
                                let mut nw: Vec<i32> = w.clone();
                                nw.push(l);
                                next.push(nw);
                            }
                        }
                    }
                    words = next;
                }
                words.into_iter().map(Element::Free).collect()
            }
            _ => unreachable!(),
        }
    }
}

/// Finite set of elements of one group, kept sorted in canonical order.
#[derive(Clone, Debug)]
pub struct GroupSubset {
    group: GroupRef,
    elems: Vec<Element>,
}

impl PartialEq for GroupSubset {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.group, &other.group) || self.group == other.group) && self.elems == other.elems
    }
}

impl Eq for GroupSubset {}

impl GroupSubset {
    pub fn new<I: IntoIterator<Item = Element>>(group: &GroupRef, elems: I) -> Result<Self> {
        let set: BTreeSet<Element> = elems.into_iter().collect();
        for e in &set {
            group.check(e)?;
        }
        Ok(GroupSubset { group: group.clone(), elems: set.into_iter().collect() })
    }

    pub(crate) fn from_sorted_unchecked(group: &GroupRef, elems: Vec<Element>) -> Self {
        GroupSubset { group: group.clone(), elems }
    }

    pub fn from_indices<I: IntoIterator<Item = u32>>(group: &GroupRef, idx: I) -> Self {
        let set: BTreeSet<u32> = idx.into_iter().collect();
        assert!(set.iter().all(|&i| group.order.is_some_and(|n| i < n)));
        GroupSubset { group: group.clone(), elems: set.into_iter().map(Element::Finite).collect() }
    }

    /// Subset of a lattice group from integer vectors.
    pub fn from_vectors(group: &GroupRef, vs: &[Vec<i64>]) -> Result<Self> {
        GroupSubset::new(group, vs.iter().cloned().map(Element::Lattice))
    }

    /// Subset of Z^1 or a cyclic group from plain integers (reduced mod n).
    pub fn from_ints(group: &GroupRef, xs: &[i64]) -> Result<Self> {
        match (&group.kind, group.order) {
            (Kind::Lattice(1), _) => GroupSubset::new(group, xs.iter().map(|&x| Element::Lattice(vec![x]))),
            (Kind::Cyclic(n), _) => {
                Ok(GroupSubset::from_indices(group, xs.iter().map(|&x| x.rem_euclid(*n as i64) as u32)))
            }
            (_, Some(n)) => {
                for &x in xs {
                    if x < 0 || x >= n as i64 {
                        return Err(Error::NotAnElement(x.to_string()));
                    }
                }
                Ok(GroupSubset::from_indices(group, xs.iter().map(|&x| x as u32)))
            }
            _ => Err(Error::Precondition("integer encoding needs Z or a finite group".into())),
        }
    }

    pub fn empty(group: &GroupRef) -> Self {
        GroupSubset { group: group.clone(), elems: Vec::new() }
    }

    pub fn identity(group: &GroupRef) -> Self {
        GroupSubset { group: group.clone(), elems: vec![group.identity()] }
    }

    pub fn whole(group: &GroupRef) -> Result<Self> {
        Ok(GroupSubset { group: group.clone(), elems: group.elements()? })
    }

    pub fn group(&self) -> &GroupRef {
        &self.group
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elems
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Element> {
        self.elems.iter()
    }

    /// Indices of a finite-group subset.
    pub fn indices(&self) -> Vec<usize> {
        self.elems.iter().map(|e| e.index()).collect()
    }

    pub fn contains(&self, g: &Element) -> bool {
        self.elems.binary_search(g).is_ok()
    }

    fn same(&self, other: &GroupSubset) -> Result<()> {
        if Arc::ptr_eq(&self.group, &other.group) || self.group == other.group {
            Ok(())
        } else {
            Err(Error::MixedGroups)
        }
    }

    pub fn insert(&self, g: Element) -> Result<Self> {
        self.group.check(&g)?;
        let mut elems = self.elems.clone();
        if let Err(pos) = elems.binary_search(&g) {
            elems.insert(pos, g);
        }
        Ok(GroupSubset::from_sorted_unchecked(&self.group, elems))
    }

    /// {ab : a in A, b in B}
    pub fn product(&self, other: &GroupSubset) -> Result<Self> {
        self.same(other)?;
        let g = &self.group;
        if let Some(n) = g.order {
            let mut seen = vec![false; n as usize];
            for a in &self.elems {
                for b in &other.elems {
                    seen[g.mul_idx(a.index() as u32, b.index() as u32) as usize] = true;
                }
            }
            let elems = (0..n).filter(|&i| seen[i as usize]).map(Element::Finite).collect();
            return Ok(GroupSubset::from_sorted_unchecked(g, elems));
        }
        let set: BTreeSet<Element> =
            self.elems.iter().flat_map(|a| other.elems.iter().map(move |b| g.mul_unchecked(a, b))).collect();
        Ok(GroupSubset::from_sorted_unchecked(g, set.into_iter().collect()))
    }

    /// Product of several subsets, left to right.
    pub fn product_all(parts: &[&GroupSubset]) -> Result<Self> {
        let mut acc = GroupSubset::identity(parts[0].group());
        for p in parts {
            acc = acc.product(p)?;
        }
        Ok(acc)
    }

    /// A^e with A^0 = {1}.
    pub fn power(&self, e: u32) -> Self {
        let mut acc = GroupSubset::identity(&self.group);
        for _ in 0..e {
            acc = self.product(&acc).expect("same group");
        }
        acc
    }

    /// {a^-1 : a in A}
    pub fn inverse(&self) -> Self {
        let set: BTreeSet<Element> = self.elems.iter().map(|a| self.group.inv(a)).collect();
        GroupSubset::from_sorted_unchecked(&self.group, set.into_iter().collect())
    }

    /// A ∪ A^-1 with the identity forced in or out.
    pub fn symmetrize(&self, include_identity: bool) -> Self {
        let mut set: BTreeSet<Element> = self.elems.iter().cloned().collect();
        set.extend(self.elems.iter().map(|a| self.group.inv(a)));
        let id = self.group.identity();
        if include_identity {
            set.insert(id);
        } else {
            set.remove(&id);
        }
        GroupSubset::from_sorted_unchecked(&self.group, set.into_iter().collect())
    }

    pub fn union(&self, other: &GroupSubset) -> Result<Self> {
        self.same(other)?;
        let set: BTreeSet<Element> = self.elems.iter().chain(&other.elems).cloned().collect();
        Ok(GroupSubset::from_sorted_unchecked(&self.group, set.into_iter().collect()))
    }

    pub fn intersection(&self, other: &GroupSubset) -> Result<Self> {
        self.same(other)?;
        let elems = self.elems.iter().filter(|e| other.contains(e)).cloned().collect();
        Ok(GroupSubset::from_sorted_unchecked(&self.group, elems))
    }

    pub fn difference(&self, other: &GroupSubset) -> Result<Self> {
        self.same(other)?;
        let elems = self.elems.iter().filter(|e| !other.contains(e)).cloned().collect();
        Ok(GroupSubset::from_sorted_unchecked(&self.group, elems))
    }

    pub fn is_subset(&self, other: &GroupSubset) -> bool {
        self.same(other).is_ok() && self.elems.iter().all(|e| other.contains(e))
    }

    pub fn is_disjoint(&self, other: &GroupSubset) -> bool {
        !self.elems.iter().any(|e| other.contains(e))
    }

    pub fn is_symmetric(&self) -> bool {
        self.elems.iter().all(|a| self.contains(&self.group.inv(a)))
    }

    /// gA
    pub fn left_translate(&self, g: &Element) -> Self {
        let set: BTreeSet<Element> = self.elems.iter().map(|a| self.group.mul_unchecked(g, a)).collect();
        GroupSubset::from_sorted_unchecked(&self.group, set.into_iter().collect())
    }

    /// Ag
    pub fn right_translate(&self, g: &Element) -> Self {
        let set: BTreeSet<Element> = self.elems.iter().map(|a| self.group.mul_unchecked(a, g)).collect();
        GroupSubset::from_sorted_unchecked(&self.group, set.into_iter().collect())
    }

    /// Closed under multiplication and inverses, and contains the identity.
    pub fn is_subgroup(&self) -> bool {
        let g = &self.group;
        self.contains(&g.identity())
            && self
                .elems
                .iter()
                .all(|a| self.contains(&g.inv(a)) && self.elems.iter().all(|b| self.contains(&g.mul_unchecked(a, b))))
    }

    /// Subgroup stable under conjugation by every element (finite groups).
    pub fn is_normal(&self) -> bool {
        let g = &self.group;
        if !self.is_subgroup() {
            return false;
        }
        let Ok(all) = g.elements() else { return false };
        all.iter().all(|x| self.elems.iter().all(|h| self.contains(&g.conjugate(x, h))))
    }

    /// JSON array of canonical encodings.
    pub fn encode(&self) -> Value {
        Value::Array(self.elems.iter().map(|e| self.group.encode(e)).collect())
    }

    pub fn decode(group: &GroupRef, v: &Value) -> Result<Self> {
        let arr = v.as_array().ok_or_else(|| Error::Parse(format!("expected an element array, got {v}")))?;
        GroupSubset::new(group, arr.iter().map(|e| group.decode(e)).collect::<Result<Vec<_>>>()?)
    }
}

impl fmt::Display for GroupSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.elems.iter().map(|e| e.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// All products of at most r generators, after symmetrizing with the identity.
pub fn ball(group: &GroupRef, gens: &GroupSubset, r: u32) -> Result<GroupSubset> {
    if !Arc::ptr_eq(group, gens.group()) && **group != **gens.group() {
        return Err(Error::MixedGroups);
    }
    let s = gens.symmetrize(true);
    let mut acc = GroupSubset::identity(group);
    let mut frontier = acc.clone();
    for _ in 0..r {
        let grown = frontier.product(&s)?;
        let fresh = grown.difference(&acc)?;
        if fresh.is_empty() {
            break;
        }
        acc = acc.union(&fresh)?;
        frontier = fresh;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(n: u32, xs: &[i64]) -> GroupSubset {
        GroupSubset::from_ints(&Group::cyclic(n), xs).unwrap()
    }

    #[test]
    fn cyclic_law() {
        let g = Group::cyclic(6);
        assert_eq!(g.mul(&Element::Finite(4), &Element::Finite(5)).unwrap(), Element::Finite(3));
        assert_eq!(g.inv(&Element::Finite(2)), Element::Finite(4));
        assert_eq!(g.inv(&g.identity()), g.identity());
        assert!(g.mul(&Element::Finite(6), &Element::Finite(0)).is_err());
    }

    #[test]
    fn free_reduction() {
        let g = Group::free(2);
        let ab = g.parse_word("ab").unwrap();
        let b_inv = g.parse_word("B").unwrap();
        assert_eq!(g.mul(&ab, &b_inv).unwrap(), g.parse_word("a").unwrap());
        assert_eq!(g.inv(&ab), g.parse_word("BA").unwrap());
        assert_eq!(g.encode(&g.parse_word("aAb").unwrap()), Value::from("b"));
        assert_eq!(g.encode(&g.identity()), Value::from("1"));
    }

    #[test]
    fn subset_products() {
        let zz = Group::lattice(1);
        let a = GroupSubset::from_ints(&zz, &[0, 1]).unwrap();
        let b = GroupSubset::from_ints(&zz, &[0, 2]).unwrap();
        assert_eq!(a.product(&b).unwrap(), GroupSubset::from_ints(&zz, &[0, 1, 2, 3]).unwrap());
        assert!(a.product(&GroupSubset::empty(&zz)).unwrap().is_empty());
        assert_eq!(z(6, &[1, 2]).product(&z(6, &[3])).unwrap(), z(6, &[4, 5]));
        let m = GroupSubset::from_ints(&zz, &[-1, 0, 1]).unwrap();
        assert_eq!(m.power(2), GroupSubset::from_ints(&zz, &[-2, -1, 0, 1, 2]).unwrap());
        assert_eq!(m.power(0), GroupSubset::identity(&zz));
        assert_eq!(z(5, &[1]).power(3), z(5, &[3]));
        assert_eq!(z(6, &[1]).product(&GroupSubset::from_ints(&zz, &[0]).unwrap()), Err(Error::MixedGroups));
    }

    #[test]
    fn symmetrize_cases() {
        assert_eq!(z(6, &[1]).symmetrize(true), z(6, &[0, 1, 5]));
        assert_eq!(z(6, &[1, 5]).symmetrize(false), z(6, &[1, 5]));
        assert_eq!(z(6, &[]).symmetrize(true), z(6, &[0]));
    }

    #[test]
    fn balls() {
        let f2 = Group::free(2);
        let gens = GroupSubset::new(&f2, f2.generators()).unwrap();
        assert_eq!(ball(&f2, &gens, 1).unwrap().len(), 5);
        assert_eq!(ball(&f2, &gens, 0).unwrap(), GroupSubset::identity(&f2));
        let z2 = Group::lattice(2);
        let g2 = GroupSubset::new(&z2, z2.generators()).unwrap();
        assert_eq!(ball(&z2, &g2, 2).unwrap().len(), 13);
    }

    #[test]
    fn canonical_orders() {
        assert_eq!(
            Group::cyclic(4).enumerate_nonidentity(3).unwrap(),
            vec![Element::Finite(1), Element::Finite(2), Element::Finite(3)]
        );
        let f1 = Group::free(1);
        let firsts: Vec<Value> = f1.enumerate_nonidentity(2).unwrap().iter().map(|e| f1.encode(e)).collect();
        assert_eq!(firsts, vec![Value::from("a"), Value::from("A")]);
        assert!(Group::cyclic(4).enumerate_nonidentity(0).unwrap().is_empty());
        assert!(Group::cyclic(4).enumerate_nonidentity(4).is_err());
        let z2 = Group::lattice(2);
        let first: Vec<Element> = z2.canonical_iter().take(9).collect();
        assert_eq!(first[0], z2.identity());
        assert_eq!(first[1], Element::Lattice(vec![-1, -1]));
        assert_eq!(first.len(), 9);
    }

    #[test]
    fn dihedral_relations() {
        let d = Group::dihedral(4);
        let (r, s) = (Element::Finite(1), Element::Finite(4));
        let r4 = (0..4).fold(d.identity(), |acc, _| d.mul_unchecked(&acc, &r));
        assert_eq!(r4, d.identity());
        assert_eq!(d.mul_unchecked(&s, &s), d.identity());
        // s r s = r^-1
        let srs = d.mul_unchecked(&d.mul_unchecked(&s, &r), &s);
        assert_eq!(srs, d.inv(&r));
    }

    #[test]
    fn product_group_coordinates() {
        let g = Group::product(&[Group::cyclic(2), Group::cyclic(16)]).unwrap();
        assert_eq!(g.order(), Some(32));
        assert_eq!(g.split(17), vec![1, 1]);
        assert_eq!(g.mul_idx(17, 31), g.join(&[0, 0]));
        assert!(Group::product(&[Group::lattice(1)]).is_err());
    }

    #[test]
    fn table_validation() {
        let good = vec![vec![0, 1], vec![1, 0]];
        assert!(Group::table(good).is_ok());
        assert!(Group::table(vec![vec![1, 0], vec![0, 1]]).is_err());
        assert!(Group::table(vec![vec![0, 1], vec![1, 1]]).is_err());
    }

    #[test]
    fn descriptor_round_trip() {
        let d: GroupDescriptor =
            serde_json::from_str(r#"{"kind":"product","factors":[{"kind":"cyclic","n":2},{"kind":"dihedral","n":3}]}"#)
                .unwrap();
        let g = Group::from_descriptor(&d).unwrap();
        assert_eq!(g.order(), Some(12));
        assert_eq!(g.descriptor(), d);
    }

    #[test]
    fn subgroup_lattices() {
        let caps = Caps::default();
        let z6 = Group::cyclic(6);
        let n: Vec<Vec<usize>> = z6.normal_subgroups(&caps).unwrap().iter().map(|h| h.indices()).collect();
        assert_eq!(n, vec![vec![0], vec![0, 3], vec![0, 2, 4], vec![0, 1, 2, 3, 4, 5]]);
        let v4 = Group::product(&[Group::cyclic(2), Group::cyclic(2)]).unwrap();
        assert_eq!(v4.normal_subgroups(&caps).unwrap().len(), 5);
        assert_eq!(Group::cyclic(1).normal_subgroups(&caps).unwrap().len(), 1);
        // D4 has 10 subgroups, 6 of them normal
        let d4 = Group::dihedral(4);
        assert_eq!(d4.subgroups(&caps).unwrap().len(), 10);
        assert_eq!(d4.normal_subgroups(&caps).unwrap().len(), 6);
        assert!(Group::cyclic(500).subgroups(&caps).is_err());
    }
}
