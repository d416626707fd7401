//! Report serialisation.
//!
//! Two stable formats share one tree of records:
//!
//! * `text`: one `key: value` line per leaf, keys joined with `.`, list items indexed
//!   (`checks.0.name: ...`). Lines appear in insertion order.
//! * `tree`: nested records, two-space indentation, `key:` opening a nested record
//!   and `- ` marking list items.
//!
//! Reals are printed with the number of significant digits they were computed to,
//! followed by `(N digits)`.

use std::fmt::Write;

use rug::Float;

use crate::analytic::AlgebraicLValue;
use crate::bsd::{AlgebraicSide, BsdReport, FamilyValuationReport};
use crate::descent::SelmerReport;
use crate::families::{DensityReport, HypothesisReport, TwistFamily};
use crate::heegner::HeegnerResult;
use crate::localdata::{LocalData, TwistedTamagawaReport};

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Value(String),
    Record(Vec<(String, Node)>),
    List(Vec<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Tree,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Format, String> {
        match s {
            "text" => Ok(Format::Text),
            "tree" => Ok(Format::Tree),
            _ => Err(format!("unknown format {}", s)),
        }
    }
}

/// Builder for record nodes.
#[derive(Debug, Default)]
pub struct Rec(Vec<(String, Node)>);

impl Rec {
    pub fn new() -> Rec {
        Rec(Vec::new())
    }

    pub fn put(mut self, key: &str, v: impl ToString) -> Rec {
        self.0.push((key.to_string(), Node::Value(v.to_string())));
        self
    }

    pub fn opt<T: ToString>(self, key: &str, v: Option<T>) -> Rec {
        match v {
            Some(v) => self.put(key, v),
            None => self.put(key, "none"),
        }
    }

    pub fn node(mut self, key: &str, n: Node) -> Rec {
        self.0.push((key.to_string(), n));
        self
    }

    pub fn real(self, key: &str, x: &Float, digits: u32) -> Rec {
        self.put(key, fmt_real(x, digits))
    }

    pub fn build(self) -> Node {
        Node::Record(self.0)
    }
}

pub fn fmt_real(x: &Float, digits: u32) -> String {
    format!("{} ({} digits)", x.to_string_radix(10, Some(digits as usize)), digits)
}

fn list<T>(items: &[T], f: impl Fn(&T) -> Node) -> Node {
    Node::List(items.iter().map(f).collect())
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub trait ToReport {
    fn to_report(&self) -> Node;
}

impl ToReport for LocalData {
    fn to_report(&self) -> Node {
        Rec::new()
            .put("prime", &self.prime)
            .put("kodaira", self.kodaira)
            .put("tamagawa", self.tamagawa)
            .put("conductor_exponent", self.f_exp)
            .put("reduction", self.reduction)
            .build()
    }
}

impl ToReport for HypothesisReport {
    fn to_report(&self) -> Node {
        Rec::new()
            .put("condition_tor", self.condition_tor)
            .put("cusp_nontrivial", self.cusp_nontrivial)
            .opt("field_e", self.two_torsion_fields.as_ref().map(|f| f.0.clone()))
            .opt("field_eprime", self.two_torsion_fields.as_ref().map(|f| f.1.clone()))
            .opt("l_alg", self.l_alg.clone())
            .put("two_primary_torsion", self.two_primary_torsion)
            .put("assume_odd_manin", self.assume_odd_manin)
            .put("passes", self.passes())
            .build()
    }
}

impl ToReport for TwistFamily {
    fn to_report(&self) -> Node {
        Rec::new()
            .put("curve", &self.e)
            .put("p", self.p)
            .node(
                "qs",
                list(&self.qs, |q| Rec::new().put("q", q.q).put("q_star", q.q_star).put("kind", q.kind).build()),
            )
            .put("r", self.r)
            .put("m", &self.m)
            .put("minus_pm", self.minus_pm())
            .put("e_m", &self.em)
            .put("e_minus_pm", &self.epm)
            .put("p_is_minus_one_mod_8", self.p_is_minus_one_mod_8)
            .put("strengthened", self.strengthened())
            .put("failed_clauses", self.failed_clauses().join("; "))
            .build()
    }
}

impl ToReport for AlgebraicLValue {
    fn to_report(&self) -> Node {
        let digits = (self.precision_bits as f64 * std::f64::consts::LOG10_2).floor() as u32;
        Rec::new()
            .put("derivative_order", self.derivative_order)
            .real("value", &self.value, digits)
            .real("omega", &self.omega, digits)
            .opt("ratio", self.ratio.clone())
            .opt("ord2", self.ord2)
            .put("conductor", &self.conductor)
            .put("terms", self.terms)
            .put("error_bound", format!("{:.1e}", self.error_bound))
            .build()
    }
}

impl ToReport for SelmerReport {
    fn to_report(&self) -> Node {
        Rec::new()
            .put("sel_phi_dim", self.sel_phi_dim)
            .put("sel_phi_dual_dim", self.sel_phi_dual_dim)
            .opt("sel2_dim", self.sel2_dim)
            .put("sel2_bounds", format!("{}..{}", self.sel2_bounds.0, self.sel2_bounds.1))
            .put("generators_phi", join(&self.generators_phi))
            .put("generators_phi_dual", join(&self.generators_phi_dual))
            .opt("sha2_dim", self.sha2_dim)
            .opt("rank_used", self.rank_used)
            .put("rank_conditional", self.rank_conditional)
            .put("cassels_lhs", &self.cassels.lhs)
            .put("cassels_rhs", &self.cassels.rhs)
            .put("cassels_equal", self.cassels.equal)
            .node(
                "local_images",
                list(&self.cassels.local_images, |(v, k)| Rec::new().put("place", v).put("size", k).build()),
            )
            .build()
    }
}

impl ToReport for TwistedTamagawaReport {
    fn to_report(&self) -> Node {
        Rec::new()
            .node(
                "predictions",
                list(&self.predictions, |p| {
                    Rec::new()
                        .put("curve", &p.curve)
                        .put("prime", &p.prime)
                        .put("computed", p.computed)
                        .put("predicted", p.predicted)
                        .build()
                }),
            )
            .put("ord2_level_product_m", self.ord2_base_primes[0])
            .put("ord2_level_product_minus_pm", self.ord2_base_primes[1])
            .put("mismatches", self.mismatches().join("; "))
            .build()
    }
}

impl ToReport for AlgebraicSide {
    fn to_report(&self) -> Node {
        Rec::new()
            .node(
                "tamagawa",
                list(&self.tamagawa, |(p, c)| Rec::new().put("prime", p).put("c", c).build()),
            )
            .put("torsion_order", self.torsion_order)
            .opt("sel2_dim", self.sel2_dim)
            .opt("sha2_dim", self.sha2_dim)
            .opt("sha_ord2", self.sha_ord2)
            .opt("rhs_ord2", self.rhs_ord2)
            .put("rank_proved", self.rank_proved)
            .build()
    }
}

impl ToReport for BsdReport {
    fn to_report(&self) -> Node {
        let mut r = Rec::new()
            .put("curve", &self.curve)
            .put("analytic_rank", self.analytic_rank)
            .opt("l_ratio", self.l_ratio.clone())
            .opt("generator", self.generator.clone());
        if let Some(reg) = &self.regulator {
            r = r.real("regulator", reg, self.digits);
        }
        r.opt("lhs_ord2", self.lhs_ord2)
            .opt("rhs_ord2", self.rhs_ord2)
            .node("algebraic", self.algebraic.to_report())
            .opt("gate_passes", self.gate_passes)
            .put("assume_odd_manin", self.assume_odd_manin)
            .node("assumptions", list(&self.assumptions, |a| Node::Value(a.clone())))
            .put("verdict", self.verdict)
            .build()
    }
}

impl ToReport for FamilyValuationReport {
    fn to_report(&self) -> Node {
        Rec::new()
            .put("p", self.p)
            .put("m", &self.m)
            .put("r", self.r)
            .node(
                "checks",
                list(&self.checks, |c| {
                    Rec::new()
                        .put("name", &c.name)
                        .put("predicted", c.predicted)
                        .opt("computed", c.computed)
                        .put("conditional", c.conditional)
                        .put("holds", c.holds())
                        .build()
                }),
            )
            .node("assumptions", list(&self.assumptions, |a| Node::Value(a.clone())))
            .put("verdict", self.verdict)
            .build()
    }
}

impl ToReport for HeegnerResult {
    fn to_report(&self) -> Node {
        let d = self.digits;
        let mut r = Rec::new()
            .put("p", self.p)
            .put("c", self.c)
            .put("m", self.m)
            .put("twist", &self.twist)
            .put("cm_points", self.cm_points.len())
            .put("terms", self.terms)
            .put("chi_sum", self.chi_sum)
            .real("numeric_x", &self.numeric_x, d)
            .real("numeric_t", &self.numeric_t, d)
            .put("reality_residual", format!("{:.1e}", self.reality_residual))
            .opt("genus_torsion_order_two", self.genus_torsion_order_two)
            .opt("rational_point", self.rational_point.clone())
            .put("reconstructed_half", self.reconstructed_half);
        if let Some(h) = &self.height {
            r = r.real("height_z_m", h, d.min(40));
        }
        r = r.opt("gz_residual", self.gz_residual.map(|x| format!("{:.3e}", x)));
        if let Some(div) = &self.divisibility {
            r = r.node(
                "divisibility",
                Rec::new()
                    .put("generator", &div.generator)
                    .real("generator_height", &div.generator_height, d.min(40))
                    .put("halvings", div.halvings)
                    .opt("ratio_ord2", div.ratio_ord2)
                    .put("predicted_ord2", div.predicted_ord2)
                    .opt("twice_z_is_pm_generator", div.twice_z_is_pm_generator)
                    .build(),
            );
        }
        r.build()
    }
}

impl ToReport for DensityReport {
    fn to_report(&self) -> Node {
        Rec::new()
            .put("x", self.x)
            .put("admissible", self.admissible)
            .put("total", self.total)
            .put("ratio", &self.ratio)
            .put("ratio_decimal", format!("{:.6}", self.ratio_f64()))
            .put("s0", self.s0)
            .build()
    }
}

fn flatten(prefix: &str, n: &Node, out: &mut String) {
    match n {
        Node::Value(v) => {
            let _ = writeln!(out, "{}: {}", prefix, v);
        }
        Node::Record(items) => {
            for (k, v) in items {
                let key = if prefix.is_empty() { k.clone() } else { format!("{}.{}", prefix, k) };
                flatten(&key, v, out);
            }
        }
        Node::List(items) => {
            if items.is_empty() {
                let _ = writeln!(out, "{}: []", prefix);
            }
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{}.{}", prefix, i), v, out);
            }
        }
    }
}

fn tree(n: &Node, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match n {
        Node::Value(v) => {
            let _ = writeln!(out, "{}{}", pad, v);
        }
        Node::Record(items) => {
            for (k, v) in items {
                match v {
                    Node::Value(s) => {
                        let _ = writeln!(out, "{}{}: {}", pad, k, s);
                    }
                    Node::List(l) if l.is_empty() => {
                        let _ = writeln!(out, "{}{}: []", pad, k);
                    }
                    _ => {
                        let _ = writeln!(out, "{}{}:", pad, k);
                        tree(v, indent + 1, out);
                    }
                }
            }
        }
        Node::List(items) => {
            for v in items {
                match v {
                    Node::Value(s) => {
                        let _ = writeln!(out, "{}- {}", pad, s);
                    }
                    _ => {
                        let _ = writeln!(out, "{}-", pad);
                        tree(v, indent + 1, out);
                    }
                }
            }
        }
    }
}

pub fn render(n: &Node, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Text => flatten("", n, &mut out),
        Format::Tree => tree(n, 0, &mut out),
    }
    out
}

/// Parse the text format back into (key, value) pairs.
pub fn parse_text(s: &str) -> Vec<(String, String)> {
    s.lines()
        .filter_map(|l| l.split_once(": ").map(|(k, v)| (k.to_string(), v.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Node {
        Rec::new()
            .put("a", 1)
            .node("b", Rec::new().put("c", "x").node("d", Node::List(vec![Node::Value("u".into()), Rec::new().put("e", 2).build()])).build())
            .node("empty", Node::List(vec![]))
            .build()
    }

    #[test]
    fn text_format() {
        let t = render(&sample(), Format::Text);
        assert_eq!(t, "a: 1\nb.c: x\nb.d.0: u\nb.d.1.e: 2\nempty: []\n");
        let kv = parse_text(&t);
        assert_eq!(kv[3], ("b.d.1.e".to_string(), "2".to_string()));
    }

    #[test]
    fn tree_format() {
        let t = render(&sample(), Format::Tree);
        assert_eq!(t, "a: 1\nb:\n  c: x\n  d:\n    - u\n    -\n      e: 2\nempty: []\n");
    }

    #[test]
    fn reals_carry_precision() {
        let x = Float::with_val(100, 0.5f64);
        assert_eq!(fmt_real(&x, 5), "5.0000e-1 (5 digits)");
    }
}
