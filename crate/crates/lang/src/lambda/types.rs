//! Equi-recursive types as finite graphs (regular trees).
//!
//! Types are kept minimized and numbered breadth-first from the root, so
//! structural equality of [`LType`] values coincides with equality of the
//! infinite trees they denote.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Node {
    Nat,
    Arrow(usize, usize),
}

/// A contractive regular type built from `nat` and `→`. The root is node 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LType {
    nodes: Vec<Node>,
}

/// Type syntax with explicit recursion binders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeExpr {
    Nat,
    Arrow(Box<TypeExpr>, Box<TypeExpr>),
    Var(String),
    Rec(String, Box<TypeExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TypeSyntaxError {
    #[error("type variable `{0}` is not bound")]
    Unbound(String),
    #[error("recursive type `rec {0}. …` is not contractive")]
    NonContractive(String),
}

impl LType {
    pub fn nat() -> Self {
        LType { nodes: vec![Node::Nat] }
    }

    pub fn arrow(dom: &LType, cod: &LType) -> Self {
        let off_d = 1;
        let off_c = 1 + dom.nodes.len();
        let mut nodes = vec![Node::Arrow(off_d, off_c)];
        for (off, t) in [(off_d, dom), (off_c, cod)] {
            nodes.extend(t.nodes.iter().map(|n| match *n {
                Node::Nat => Node::Nat,
                Node::Arrow(a, b) => Node::Arrow(a + off, b + off),
            }));
        }
        canonical(&nodes, 0)
    }

    /// `T = T → cod`.
    pub fn self_arrow(cod: &LType) -> Self {
        let off = 1;
        let mut nodes = vec![Node::Arrow(0, off)];
        nodes.extend(cod.nodes.iter().map(|n| match *n {
            Node::Nat => Node::Nat,
            Node::Arrow(a, b) => Node::Arrow(a + off, b + off),
        }));
        canonical(&nodes, 0)
    }

    pub fn from_syntax(t: &TypeExpr) -> Result<Self, TypeSyntaxError> {
        let mut nodes: Vec<Option<Node>> = Vec::new();
        let root = build(t, &mut Vec::new(), &mut nodes)?;
        let nodes: Vec<Node> = nodes.into_iter().map(|n| n.expect("every placeholder is filled")).collect();
        Ok(canonical(&nodes, root))
    }

    pub fn is_nat(&self) -> bool {
        self.nodes[0] == Node::Nat
    }

    /// Domain and codomain of a function type.
    pub fn as_arrow(&self) -> Option<(LType, LType)> {
        match self.nodes[0] {
            Node::Arrow(a, b) => Some((canonical(&self.nodes, a), canonical(&self.nodes, b))),
            Node::Nat => None,
        }
    }

    /// Number of distinct subtrees.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn to_syntax(&self) -> TypeExpr {
        let cyclic = self.cyclic_nodes();
        let mut stack = Vec::new();
        self.syntax_of(0, &cyclic, &mut stack)
    }

    fn cyclic_nodes(&self) -> HashSet<usize> {
        (0..self.nodes.len())
            .filter(|&n| {
                let mut seen = HashSet::new();
                let mut todo = self.children(n);
                while let Some(m) = todo.pop() {
                    if m == n {
                        return true;
                    }
                    if seen.insert(m) {
                        todo.extend(self.children(m));
                    }
                }
                false
            })
            .collect()
    }

    fn children(&self, n: usize) -> Vec<usize> {
        match self.nodes[n] {
            Node::Nat => vec![],
            Node::Arrow(a, b) => vec![a, b],
        }
    }

    fn syntax_of(&self, n: usize, cyclic: &HashSet<usize>, stack: &mut Vec<usize>) -> TypeExpr {
        if let Some(k) = stack.iter().position(|&m| m == n) {
            return TypeExpr::Var(var_name(k));
        }
        let body = |stack: &mut Vec<usize>| match self.nodes[n] {
            Node::Nat => TypeExpr::Nat,
            Node::Arrow(a, b) => TypeExpr::Arrow(
                Box::new(self.syntax_of(a, cyclic, stack)),
                Box::new(self.syntax_of(b, cyclic, stack)),
            ),
        };
        if cyclic.contains(&n) {
            let name = var_name(stack.len());
            stack.push(n);
            let b = body(stack);
            stack.pop();
            TypeExpr::Rec(name, Box::new(b))
        } else {
            body(stack)
        }
    }
}

fn var_name(k: usize) -> String {
    if k == 0 { "t".to_string() } else { format!("t{k}") }
}

fn build(
    t: &TypeExpr,
    env: &mut Vec<(String, usize)>,
    nodes: &mut Vec<Option<Node>>,
) -> Result<usize, TypeSyntaxError> {
    match t {
        TypeExpr::Nat => {
            nodes.push(Some(Node::Nat));
            Ok(nodes.len() - 1)
        }
        TypeExpr::Arrow(a, b) => {
            let a = build(a, env, nodes)?;
            let b = build(b, env, nodes)?;
            nodes.push(Some(Node::Arrow(a, b)));
            Ok(nodes.len() - 1)
        }
        TypeExpr::Var(x) => env
            .iter()
            .rev()
            .find(|(y, _)| y == x)
            .map(|&(_, n)| n)
            .ok_or_else(|| TypeSyntaxError::Unbound(x.clone())),
        TypeExpr::Rec(x, body) => {
            nodes.push(None);
            let p = nodes.len() - 1;
            env.push((x.clone(), p));
            let r = build(body, env, nodes);
            env.pop();
            let r = r?;
            match nodes[r] {
                Some(n) => {
                    nodes[p] = Some(n);
                    Ok(p)
                }
                None => Err(TypeSyntaxError::NonContractive(x.clone())),
            }
        }
    }
}

/// Minimizes the graph reachable from `root` and renumbers it breadth-first.
fn canonical(nodes: &[Node], root: usize) -> LType {
    let mut reach = vec![root];
    let mut seen: HashSet<usize> = [root].into_iter().collect();
    let mut i = 0;
    while i < reach.len() {
        if let Node::Arrow(a, b) = nodes[reach[i]] {
            for c in [a, b] {
                if seen.insert(c) {
                    reach.push(c);
                }
            }
        }
        i += 1;
    }
    // Partition refinement: classes by constructor, then by classes of children.
    let mut class: HashMap<usize, usize> =
        reach.iter().map(|&n| (n, usize::from(matches!(nodes[n], Node::Arrow(..))))).collect();
    let mut count = class.values().collect::<HashSet<_>>().len();
    loop {
        let mut sig: HashMap<(usize, Option<(usize, usize)>), usize> = HashMap::new();
        let mut next = HashMap::new();
        for &n in &reach {
            let key = match nodes[n] {
                Node::Nat => (class[&n], None),
                Node::Arrow(a, b) => (class[&n], Some((class[&a], class[&b]))),
            };
            let fresh = sig.len();
            next.insert(n, *sig.entry(key).or_insert(fresh));
        }
        let new_count = sig.len();
        class = next;
        if new_count == count {
            break;
        }
        count = new_count;
    }
    let mut id: HashMap<usize, usize> = HashMap::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::from([root]);
    while let Some(n) = queue.pop_front() {
        let c = class[&n];
        if id.contains_key(&c) {
            continue;
        }
        id.insert(c, order.len());
        order.push(n);
        if let Node::Arrow(a, b) = nodes[n] {
            queue.push_back(a);
            queue.push_back(b);
        }
    }
    let out = order
        .iter()
        .map(|&n| match nodes[n] {
            Node::Nat => Node::Nat,
            Node::Arrow(a, b) => Node::Arrow(id[&class[&a]], id[&class[&b]]),
        })
        .collect();
    LType { nodes: out }
}

/// Equality of the denoted infinite trees, by coinductive pairing: a pair
/// already under comparison is assumed equal.
pub fn type_equal(t1: &LType, t2: &LType) -> bool {
    let mut assumed = HashSet::new();
    let mut todo = vec![(0usize, 0usize)];
    while let Some((a, b)) = todo.pop() {
        if !assumed.insert((a, b)) {
            continue;
        }
        match (t1.nodes[a], t2.nodes[b]) {
            (Node::Nat, Node::Nat) => {}
            (Node::Arrow(d1, c1), Node::Arrow(d2, c2)) => {
                todo.push((d1, d2));
                todo.push((c1, c2));
            }
            _ => return false,
        }
    }
    true
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeExpr::Nat => write!(f, "nat"),
            TypeExpr::Var(x) => write!(f, "{x}"),
            TypeExpr::Rec(x, b) => write!(f, "rec {x}. {b}"),
            TypeExpr::Arrow(a, b) => match **a {
                TypeExpr::Arrow(..) | TypeExpr::Rec(..) => write!(f, "({a}) -> {b}"),
                _ => write!(f, "{a} -> {b}"),
            },
        }
    }
}

impl fmt::Display for LType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_syntax())
    }
}
