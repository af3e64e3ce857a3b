use std::sync::OnceLock;

use super::ButcherTableau;
use crate::error::{Error, Result};
use crate::optimizer::Alpha;

/// Registry entry: a named tableau plus the derivation data it was published with.
#[derive(Debug, Clone)]
pub struct SchemeInfo {
    pub tableau: ButcherTableau,
    /// Classical order stated for the scheme's family.
    pub claimed_order: usize,
    /// Weight exponent used to derive the row, when the scheme belongs to an optimized family.
    pub alpha: Option<Alpha>,
    /// Closure equations in the constraint text format.
    pub closures: Option<&'static str>,
}

const SQRT3: f64 = 1.732_050_807_568_877_2;
const SQRT15: f64 = 3.872_983_346_207_417;

fn irk24() -> ButcherTableau {
    ButcherTableau::new("IRK24", vec![vec![0.25, 0.25 - SQRT3 / 6.0], vec![0.25 + SQRT3 / 6.0, 0.25]], vec![0.5, 0.5])
        .expect("valid tableau")
}

fn irk36() -> ButcherTableau {
    ButcherTableau::new(
        "IRK36",
        vec![
            vec![5.0 / 36.0, 2.0 / 9.0 - SQRT15 / 15.0, 5.0 / 36.0 - SQRT15 / 30.0],
            vec![5.0 / 36.0 + SQRT15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - SQRT15 / 24.0],
            vec![5.0 / 36.0 + SQRT15 / 30.0, 2.0 / 9.0 + SQRT15 / 15.0, 5.0 / 36.0],
        ],
        vec![5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0],
    )
    .expect("valid tableau")
}

// b1 b2 a11 a12 a21 a22
const TWO_STAGE_ROWS: [(&str, [f64; 6]); 12] = [
    ("S2A1", [0.5, 0.5, 0.25, -0.0585699937, 0.5585699937, 0.25]),
    ("S2A2", [0.5, 0.5, 0.2199869148, 0.5600261703, -0.0600261703, 0.2800130852]),
    ("S2A3", [0.6666666667, 0.3333333333, 0.3333333333, 0.3848586017, -0.1030505367, 0.1666666667]),
    ("S2B1", [0.5, 0.5, 0.25, -0.0397174719, 0.5397174719, 0.25]),
    // a22 as printed (0.2702105718) violates a11 + a22 = 1/2 and a12 = 2 a22 by 2e-7;
    // stored here with the digits implied by those two relations
    ("S2B2", [0.5, 0.5, 0.2297892142, 0.5404215718, -0.0404215718, 0.2702107858]),
    ("S2B3", [0.6666666667, 0.3333333333, 0.3333333333, 0.3715278556, -0.0763890446, 0.1666666667]),
    ("S2C1", [0.5, 0.5, 0.25, -0.0389376339, 0.5389376339, 0.25]),
    ("S2C2", [0.5, 0.5, 0.2301921022, 0.5396157957, -0.0396157957, 0.2698078978]),
    ("S2C3", [0.6666666667, 0.3333333333, 0.3333333333, 0.3709764270, -0.0752861872, 0.1666666667]),
    ("S2D1", [0.5, 0.5, 0.25, -0.0386751346, 0.5386751346, 0.25]),
    ("S2D2", [0.8367053706, 0.1632946294, 0.4183526852, 0.2091763426, -0.2350933158, 0.0816473148]),
    ("S2D3", [0.6666666667, 0.3333333333, 0.3333333333, 0.3707908119, -0.0749149571, 0.1666666667]),
];

// b1 b2 b3 a11 a12 a13 a21 a22 a23 a31 a32 a33
#[rustfmt::skip]
const THREE_STAGE_ROWS: [(&str, [f64; 12]); 16] = [
    ("S3A1", [0.4902164042, 0.4902164042, 0.0195671916, 0.2267610814, 0.0, 0.0, 0.5149632492, 0.2396583441, 0.0381882637, 0.7895342543, -0.8134251058, 0.0335805745]),
    ("S3A2", [0.2777777778, 0.4444444444, 0.2777777778, 0.1388888889, -0.0386992007, 0.0125119772, 0.3019647782, 0.2222222222, -0.0241870005, 0.2652658006, 0.4831436452, 0.1388888889]),
    ("S3A3", [0.4990278482, 0.2504860759, 0.2504860759, 0.2548461218, -0.0438954380, 0.0, 0.7842232807, 0.0183927967, 0.0, 0.2800365570, 0.2664412801, 0.2267610814]),
    ("S3A4", [0.6702568370, 1.5072733738, -1.1775302108, 0.25, 0.125, -0.1193016952, 0.5223474224, 1.0446948445, -0.8704412903, 0.3872607826, 1.0200312043, -0.7946948449]),
    ("S3B1", [0.4968572595, 0.4968572595, 0.0062854810, 0.2162822020, 0.0, 0.0, 0.5384237709, 0.2395278133, 0.0120518190, 2.2933385501, -2.3343956093, 0.0441899847]),
    ("S3B2", [0.2777777778, 0.4444444444, 0.2777777778, 0.1388888889, -0.0361869818, 0.0099997583, 0.3003946414, 0.2222222222, -0.0226168636, 0.2677780195, 0.4806314263, 0.1388888889]),
    ("S3B3", [0.0062854810, 0.4968572595, 0.4968572595, 0.0441899847, 0.9526770898, 0.0, -0.0295312165, 0.2395278133, 0.0, 0.0290118251, 0.5384237709, 0.2162822020]),
    ("S3B4", [0.6655575665, 1.4996524498, -1.1652100163, 0.25, 0.125, -0.1202281088, 0.5184708679, 1.0369417358, -0.8579660534, 0.3844142138, 1.0165737263, -0.7869417358]),
    ("S3C1", [0.4973158852, 0.4973158852, 0.0053682296, 0.2155587380, 0.0, 0.0, 0.5399915310, 0.2395372403, 0.0102807976, 2.6764782769, -2.7187053498, 0.0449040217]),
    ("S3C2", [0.2777777778, 0.4444444444, 0.2777777778, 0.1388888889, -0.0360294386, 0.0098422150, 0.3002961769, 0.2222222222, -0.0225183991, 0.2679355627, 0.4804738830, 0.1388888889]),
    ("S3C3", [0.0053682296, 0.4973158852, 0.4973158852, 0.0449040217, 0.9524190295, 0.0, -0.0293468092, 0.2395372403, 0.0, 0.0288909930, 0.5399915310, 0.2155587380]),
    ("S3C4", [0.6652690242, 1.4991870878, -1.1644561120, 0.25, 0.125, -0.1202853659, 0.5182333238, 1.0364666476, -0.8572009786, 0.3842400678, 1.0163632850, -0.7864666476]),
    ("S3D1", [0.4974707660, 0.4974707660, 0.0050584680, 0.2153144231, 0.0, 0.0, 0.5405195031, 0.2395409352, 0.0096836713, 2.8373912650, -2.8800130375, 0.0451446417]),
    ("S3D2", [0.2777777778, 0.4444444444, 0.2777777778, 0.1388888889, -0.0359766675, 0.0097894440, 0.3002631950, 0.2222222222, -0.0224854172, 0.2679883338, 0.4804211120, 0.1388888889]),
    ("S3D3", [0.0050584680, 0.4974707660, 0.4974707660, 0.0451446417, 0.9523324891, 0.0, -0.0292850447, 0.2395409352, 0.0, 0.0288516507, 0.5405195031, 0.2153144231]),
    ("S3D4", [0.6651725342, 1.4990315365, -1.1642040707, 0.25, 0.125, -0.1203045227, 0.5181539006, 1.0363078012, -0.8569451582, 0.3841818496, 1.0162929609, -0.7863078012]),
];

fn family_alpha(letter: u8) -> Alpha {
    match letter {
        b'A' => Alpha::Finite(0.0),
        b'B' => Alpha::Finite(4.0),
        b'C' => Alpha::Finite(16.0),
        _ => Alpha::Asymptotic,
    }
}

fn two_stage_closures(name: &str) -> &'static str {
    match name {
        "S2D1" => "order >= 3\nb1 = b2",
        "S2D2" => "order >= 3\na11 = 2*a12",
        "S2D3" => "order >= 3\na11 = 2*a22",
        _ => match name.as_bytes()[3] {
            b'1' => "b1 = b2\na11 = a22",
            b'2' => "b1 = b2\na12 = 2*a22",
            _ => "b1 = 2*b2\na11 = 2*a22",
        },
    }
}

fn three_stage_closures(name: &str) -> &'static str {
    match name.as_bytes()[3] {
        b'1' => "b1 = b2\na12 = 0\na13 = 0",
        b'2' => "b1 = b3\nb2 = 2*a22\na11 = a33\na13 + a31 = 5/18",
        b'3' => "b2 = b3\na23 = 0\na13 = 0",
        _ => "a11 = 1/4\na11 = 2*a12\na22 = 2*a21",
    }
}

fn build() -> Vec<SchemeInfo> {
    let mut out = Vec::new();
    for (name, v) in TWO_STAGE_ROWS {
        let tab = ButcherTableau::new(name, vec![vec![v[2], v[3]], vec![v[4], v[5]]], vec![v[0], v[1]])
            .expect("valid tableau");
        let letter = name.as_bytes()[2];
        let claimed_order = match (letter, name) {
            // the b1 = b2 member of the third-order family is the two-stage Gauss method
            (_, "S2D1") => 4,
            (b'D', _) => 3,
            _ => 2,
        };
        out.push(SchemeInfo {
            tableau: tab,
            claimed_order,
            alpha: Some(family_alpha(letter)),
            closures: Some(two_stage_closures(name)),
        });
    }
    for (name, v) in THREE_STAGE_ROWS {
        let tab = ButcherTableau::new(
            name,
            vec![vec![v[3], v[4], v[5]], vec![v[6], v[7], v[8]], vec![v[9], v[10], v[11]]],
            vec![v[0], v[1], v[2]],
        )
        .expect("valid tableau");
        out.push(SchemeInfo {
            // S3D2 is the three-stage Gauss method to ten digits
            claimed_order: if name == "S3D2" { 6 } else { 4 },
            tableau: tab,
            alpha: Some(family_alpha(name.as_bytes()[2])),
            closures: Some(three_stage_closures(name)),
        });
    }
    out.push(SchemeInfo {
        tableau: irk24(),
        claimed_order: 4,
        alpha: Some(Alpha::Asymptotic),
        closures: Some("order >= 3\nb1 = b2"),
    });
    out.push(SchemeInfo {
        tableau: irk36(),
        claimed_order: 6,
        alpha: Some(Alpha::Asymptotic),
        closures: Some(three_stage_closures("S3D2")),
    });
    out.push(SchemeInfo {
        tableau: ButcherTableau::new("BE", vec![vec![1.0]], vec![1.0]).expect("valid tableau"),
        claimed_order: 1,
        alpha: None,
        closures: None,
    });
    out.push(SchemeInfo {
        tableau: ButcherTableau::new("FE", vec![vec![0.0]], vec![1.0]).expect("valid tableau"),
        claimed_order: 1,
        alpha: None,
        closures: None,
    });
    out
}

/// Every registry entry, in catalog order.
pub fn registry() -> &'static [SchemeInfo] {
    static REG: OnceLock<Vec<SchemeInfo>> = OnceLock::new();
    REG.get_or_init(build)
}

pub fn scheme_names() -> Vec<&'static str> {
    registry().iter().map(|s| s.tableau.name()).collect()
}

pub fn scheme_info(name: &str) -> Result<&'static SchemeInfo> {
    registry()
        .iter()
        .find(|s| s.tableau.name().eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::UnknownScheme(name.to_string()))
}

pub fn builtin_scheme(name: &str) -> Result<ButcherTableau> {
    scheme_info(name).map(|s| s.tableau.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::butcher::order_of_accuracy;

    #[test]
    fn registry_has_every_table_row_and_references() {
        let names = scheme_names();
        assert_eq!(names.len(), 32);
        for fam in ["S2A", "S2B", "S2C", "S2D"] {
            for i in 1..=3 {
                assert!(names.contains(&format!("{fam}{i}").as_str()));
            }
        }
        for fam in ["S3A", "S3B", "S3C", "S3D"] {
            for i in 1..=4 {
                assert!(names.contains(&format!("{fam}{i}").as_str()));
            }
        }
    }

    #[test]
    fn unknown_name_is_an_error() {
        assert!(matches!(builtin_scheme("NOPE"), Err(Error::UnknownScheme(_))));
    }

    #[test]
    fn tabulated_gauss_rows_match_closed_forms() {
        let pairs = [("S2D1", irk24()), ("S3D2", irk36())];
        for (name, exact) in pairs {
            let t = builtin_scheme(name).unwrap();
            for (x, y) in t.a_flat().iter().zip(exact.a_flat()) {
                assert!((x - y).abs() <= 5e-10, "{name}: {x} vs {y}");
            }
            for (x, y) in t.b().iter().zip(exact.b()) {
                assert!((x - y).abs() <= 5e-10);
            }
        }
    }

    #[test]
    fn claimed_orders_hold() {
        for s in registry() {
            assert_eq!(order_of_accuracy(&s.tableau, 1e-9), s.claimed_order, "{}", s.tableau.name());
        }
    }

    #[test]
    fn closures_hold_on_tabulated_rows() {
        use crate::optimizer::ConstraintSet;
        for s in registry() {
            let (Some(text), Some(_)) = (s.closures, s.alpha) else {
                continue;
            };
            let set = ConstraintSet::parse(s.tableau.stages(), text).unwrap();
            for res in set.residuals(&s.tableau) {
                assert!(res.abs() < 2e-9, "{}: residual {res}", s.tableau.name());
            }
        }
    }
}
