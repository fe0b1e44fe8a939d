//! Manifold spec files: one adapted chart, its contact form, a contact
//! connection, optional Weyl-curvature corrections, truncation orders and
//! the closed characteristics to report on.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use contactq::coeffring::{parse_rational, MultiPoly, Rational};
use contactq::contact::{
    build_connection, characteristic_curve, validate_contact, Chart, ClosedCharacteristic, ContactConnection,
    ContactData, STensors,
};
use contactq::fedosov::{solve_r, FedosovData};
use contactq::weyl::{WeylAlgebra, WeylElement};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSpec {
    pub coords: Vec<CoordSpec>,
    #[serde(default)]
    pub lambda: BTreeMap<String, String>,
    #[serde(default)]
    pub connection: ConnectionSpec,
    #[serde(default)]
    pub omega_corrections: Vec<OmegaSpec>,
    #[serde(default)]
    pub trunc: TruncSpec,
    #[serde(default)]
    pub characteristics: Vec<CharacteristicSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordSpec {
    pub name: String,
    pub period: Option<Scalar>,
}

/// A rational written either as a TOML integer or as a string like `"3/2"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Text(String),
}

impl Scalar {
    fn value(&self, field: &str) -> Result<Rational, CliError> {
        match self {
            Scalar::Int(n) => Ok(Rational::from_integer((*n).into())),
            Scalar::Text(s) => parse_rational(s).map_err(|e| CliError::field(field, e.to_string())),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ConnectionSpec {
    /// Only `"flat"` is accepted.
    Named(String),
    Tensors {
        #[serde(default)]
        s2: BTreeMap<String, String>,
        #[serde(default)]
        s3: BTreeMap<String, String>,
    },
}

impl Default for ConnectionSpec {
    fn default() -> Self {
        ConnectionSpec::Named("flat".into())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaSpec {
    pub nu_power: u32,
    pub components: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncSpec {
    #[serde(default = "default_weight")]
    pub weight: i64,
    #[serde(default = "default_nu_order")]
    pub nu_order: u32,
}

fn default_weight() -> i64 {
    6
}

fn default_nu_order() -> u32 {
    2
}

impl Default for TruncSpec {
    fn default() -> Self {
        TruncSpec {
            weight: default_weight(),
            nu_order: default_nu_order(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacteristicSpec {
    #[serde(default)]
    pub base_point: BTreeMap<String, Scalar>,
    pub reeb: Option<String>,
}

impl ManifoldSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let spec: ManifoldSpec = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string().trim_end().to_string()))?;
        if spec.coords.is_empty() {
            return Err(CliError::field("coords", "at least one coordinate is required"));
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Everything derived from a spec that does not need the Weyl algebra.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub cd: ContactData,
    pub conn: ContactConnection,
    pub omega: Vec<(u32, WeylElement)>,
    pub weight: i64,
    pub nu_order: u32,
    pub characteristics: Vec<ClosedCharacteristic>,
}

impl Pipeline {
    pub fn build(spec: &ManifoldSpec, weight: Option<i64>, nu_order: Option<u32>) -> Result<Self, CliError> {
        let names: Vec<&str> = spec.coords.iter().map(|c| c.name.as_str()).collect();
        let periods = spec
            .coords
            .iter()
            .map(|c| c.period.as_ref().map(|p| p.value(&format!("coords.{}.period", c.name))).transpose())
            .collect::<Result<Vec<_>, _>>()?;
        let chart = Chart::new(&names, periods)?;
        for key in spec.lambda.keys() {
            chart.index_of(key).map_err(|_| CliError::field(&format!("lambda.{key}"), "unknown coordinate"))?;
        }
        let lambda = names
            .iter()
            .map(|n| poly_field(&chart, &format!("lambda.{n}"), spec.lambda.get(*n).map_or("0", String::as_str)))
            .collect::<Result<Vec<_>, _>>()?;
        let cd = validate_contact(chart, lambda)?;
        let s = match &spec.connection {
            ConnectionSpec::Named(n) if n == "flat" => STensors::zero(&cd),
            ConnectionSpec::Named(n) => {
                return Err(CliError::field("connection", format!("expected \"flat\" or a table, found \"{n}\"")))
            }
            ConnectionSpec::Tensors { s2, s3 } => {
                let s2 = components(&cd, "connection.s2", s2, 2)?;
                let s3 = components(&cd, "connection.s3", s3, 3)?;
                STensors::from_components(&cd, &s2, &s3)?
            }
        };
        let conn = build_connection(&cd, &s)?;
        let mut omega = Vec::new();
        for (n, o) in spec.omega_corrections.iter().enumerate() {
            let field = format!("omega_corrections[{n}]");
            let mut e = WeylElement::zero(cd.vars(), contactq::weyl::EXACT);
            for (i, p) in components(&cd, &format!("{field}.components"), &o.components, 2)? {
                if i[0] == i[1] {
                    return Err(CliError::field(&field, "diagonal component of a two-form"));
                }
                let (a, b, sign) = if i[0] < i[1] { (i[0], i[1], 1) } else { (i[1], i[0], -1) };
                let p = if sign < 0 { -&p } else { p };
                e.add_monomial(0, &[], &[a, b], &p);
            }
            omega.push((o.nu_power, e));
        }
        let mut characteristics = Vec::new();
        for (n, c) in spec.characteristics.iter().enumerate() {
            let field = format!("characteristics[{n}]");
            let base = c
                .base_point
                .iter()
                .map(|(k, v)| Ok((k.clone(), v.value(&format!("{field}.base_point.{k}"))?)))
                .collect::<Result<BTreeMap<_, _>, CliError>>()?;
            let cc = characteristic_curve(&cd, &base).map_err(|e| CliError::field(&field, e.to_string()))?;
            if let Some(r) = &c.reeb {
                if r != &cc.reeb_coord {
                    return Err(CliError::field(
                        &format!("{field}.reeb"),
                        format!("Reeb coordinate is `{}`, not `{r}`", cc.reeb_coord),
                    ));
                }
            }
            characteristics.push(cc);
        }
        Ok(Pipeline {
            cd,
            conn,
            omega,
            weight: weight.unwrap_or(spec.trunc.weight),
            nu_order: nu_order.unwrap_or(spec.trunc.nu_order),
            characteristics,
        })
    }

    pub fn algebra(&self) -> Result<Arc<WeylAlgebra>, CliError> {
        Ok(Arc::new(WeylAlgebra::new(&self.cd)?))
    }

    pub fn fedosov(&self) -> Result<FedosovData, CliError> {
        Ok(solve_r(&self.algebra()?, &self.conn, &self.omega, self.weight)?)
    }

    pub fn poly(&self, what: &str, src: &str) -> Result<MultiPoly, CliError> {
        poly_field(&self.cd.chart, what, src)
    }

    /// Closed characteristics listed in the manifold file, or the one through the
    /// origin when the Reeb coordinate is periodic and none are listed.
    pub fn orbits(&self) -> Vec<ClosedCharacteristic> {
        if !self.characteristics.is_empty() {
            return self.characteristics.clone();
        }
        characteristic_curve(&self.cd, &BTreeMap::new()).into_iter().collect()
    }
}

fn poly_field(chart: &Chart, field: &str, src: &str) -> Result<MultiPoly, CliError> {
    chart.poly(src).map_err(|e| CliError::field(field, e.to_string()))
}

fn components(
    cd: &ContactData,
    field: &str,
    map: &BTreeMap<String, String>,
    rank: usize,
) -> Result<Vec<(Vec<usize>, MultiPoly)>, CliError> {
    let mut out = Vec::new();
    for (key, src) in map {
        let here = format!("{field}.\"{key}\"");
        let idx = key
            .split(',')
            .map(|n| cd.chart.index_of(n.trim()).map_err(|_| CliError::field(&here, format!("unknown coordinate `{}`", n.trim()))))
            .collect::<Result<Vec<_>, _>>()?;
        if idx.len() != rank {
            return Err(CliError::field(&here, format!("expected {rank} comma-separated coordinates")));
        }
        out.push((idx, poly_field(&cd.chart, &here, src)?));
    }
    Ok(out)
}
