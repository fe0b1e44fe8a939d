use std::collections::BTreeMap;

use super::{ContactData, ContactError};
use crate::coeffring::Rational;

/// Closed orbit of the Reeb flow in an adapted chart: the periodic Reeb
/// coordinate runs over one period, all other coordinates stay fixed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedCharacteristic {
    pub base_point: BTreeMap<String, Rational>,
    pub reeb_coord: String,
    pub period: Rational,
}

impl ClosedCharacteristic {
    /// Parameter interval `[0, T)` of the curve `s ↦ (c = s, others fixed)`.
    pub fn parameter_range(&self) -> (Rational, Rational) {
        (Rational::from_integer(0.into()), self.period.clone())
    }
}

/// Characteristic through `base_point`. Coordinates missing from
/// `base_point` default to zero; the entry for the Reeb coordinate, if any,
/// is ignored.
pub fn characteristic_curve(
    cd: &ContactData,
    base_point: &BTreeMap<String, Rational>,
) -> Result<ClosedCharacteristic, ContactError> {
    let c = cd.reeb_coord.ok_or_else(|| {
        ContactError::Rejected("Reeb field is not a coordinate vector field in this chart".into())
    })?;
    let name = cd.chart.vars().name(c).to_string();
    let period = cd
        .chart
        .period(c)
        .cloned()
        .ok_or_else(|| ContactError::Rejected(format!("Reeb coordinate `{name}` is not periodic; no closed orbit")))?;
    let mut point = BTreeMap::new();
    for (k, v) in base_point {
        cd.chart.index_of(k)?;
        if k != &name {
            point.insert(k.clone(), v.clone());
        }
    }
    for i in cd.transverse_coords() {
        point
            .entry(cd.chart.vars().name(i).to_string())
            .or_insert_with(|| Rational::from_integer(0.into()));
    }
    Ok(ClosedCharacteristic {
        base_point: point,
        reeb_coord: name,
        period,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffring::rat;
    use crate::contact::{validate_contact, Chart};

    fn circle(period: Option<Rational>) -> ContactData {
        let chart = Chart::new(&["t", "q", "p"], vec![period, None, None]).unwrap();
        let lambda = ["1", "p", "0"].iter().map(|s| chart.poly(s).unwrap()).collect();
        validate_contact(chart, lambda).unwrap()
    }

    #[test]
    fn t_circle() {
        let cd = circle(Some(rat(1, 1)));
        let base: BTreeMap<_, _> = [("q".to_string(), rat(2, 1)), ("p".to_string(), rat(3, 1))].into();
        let cc = characteristic_curve(&cd, &base).unwrap();
        assert_eq!(cc.reeb_coord, "t");
        assert_eq!(cc.period, rat(1, 1));
        assert_eq!(cc.base_point, base);
    }

    #[test]
    fn period_three() {
        let cd = circle(Some(rat(3, 1)));
        let cc = characteristic_curve(&cd, &BTreeMap::new()).unwrap();
        assert_eq!(cc.parameter_range(), (rat(0, 1), rat(3, 1)));
    }

    #[test]
    fn open_reeb_coordinate() {
        let cd = circle(None);
        assert!(characteristic_curve(&cd, &BTreeMap::new()).is_err());
    }
}
