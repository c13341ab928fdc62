//! Coordinate charts and their validity domains.

use std::sync::Arc;

use crate::error::ExprError;
use crate::expr::{parse_expr, Expr, Params};

/// A condition `expr(p) > bound` restricting the valid region of a chart.
#[derive(Debug, Clone)]
pub struct DomainCond {
    pub expr: Expr,
    pub bound: f64,
}

/// A named coordinate chart of dimension 3 or 4 with a pure domain predicate.
#[derive(Debug, Clone)]
pub struct Chart {
    pub name: String,
    pub coords: Vec<String>,
    pub domain: Vec<DomainCond>,
    /// Parameter names that expressions on this chart may reference.
    pub param_names: Vec<String>,
}

impl Chart {
    pub fn new(name: &str, coords: &[&str], param_names: &[&str]) -> Arc<Chart> {
        Arc::new(Chart {
            name: name.to_string(),
            coords: coords.iter().map(|s| s.to_string()).collect(),
            domain: Vec::new(),
            param_names: param_names.iter().map(|s| s.to_string()).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Add a condition `expr > bound` to the domain predicate.
    pub fn with_domain(self: &Arc<Chart>, expr: &str, bound: f64) -> Result<Arc<Chart>, ExprError> {
        let mut c = (**self).clone();
        c.domain.push(DomainCond {
            expr: parse_expr(expr, &c.coords, &c.param_names)?,
            bound,
        });
        Ok(Arc::new(c))
    }

    pub fn contains(&self, p: &[f64], params: &Params) -> bool {
        if p.len() != self.dim() {
            return false;
        }
        self.domain
            .iter()
            .all(|c| c.expr.eval_value(p, params) > c.bound)
    }

    pub fn parse(&self, text: &str) -> Result<Expr, ExprError> {
        parse_expr(text, &self.coords, &self.param_names)
    }
}

/// Two fields interact only when they share a chart (by name).
pub fn same_chart(a: &Chart, b: &Chart) -> bool {
    a.name == b.name
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_predicate() {
        let chart = Chart::new("c", &["x", "y"], &[])
            .with_domain("x", 0.0)
            .unwrap()
            .with_domain("sin(y)", 1e-6)
            .unwrap();
        let params = Params::new();
        assert!(chart.contains(&[1.0, 1.0], &params));
        assert!(!chart.contains(&[-1.0, 1.0], &params));
        assert!(!chart.contains(&[1.0, 0.0], &params));
    }
}
