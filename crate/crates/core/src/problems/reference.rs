//! Published benchmark results used as comparison targets.

use serde::Serialize;

/// What a table's columns are indexed by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Dt,
    Cfl,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Row {
    /// Label as printed.
    pub label: &'static str,
    /// Registry scheme the row was computed with.
    pub scheme: &'static str,
    /// Errors per column; `None` where the table has no value.
    pub errors: &'static [Option<f64>],
    /// Rates between neighbouring columns, where printed.
    pub rates: &'static [Option<f64>],
}

impl Row {
    /// Family label shared by schemes with the same dispersion properties.
    pub fn family(&self) -> &'static str {
        family_of(self.scheme)
    }

    pub fn stages(&self) -> usize {
        if self.scheme.starts_with("S3") || self.scheme == "IRK36" {
            3
        } else {
            2
        }
    }
}

/// "S2B1" → "S2B"; the Gauss methods belong to the asymptotic families.
pub fn family_of(scheme: &str) -> &'static str {
    const FAMILIES: [&str; 8] = ["S2A", "S2B", "S2C", "S2D", "S3A", "S3B", "S3C", "S3D"];
    match scheme {
        "IRK24" => "S2D",
        "IRK36" => "S3D",
        s => FAMILIES.iter().find(|f| s.starts_with(*f)).copied().unwrap_or("other"),
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Table {
    pub number: u32,
    pub problem: u32,
    pub axis: Axis,
    pub columns: &'static [f64],
    pub rows: &'static [Row],
}

impl Table {
    pub fn column_index(&self, value: f64) -> Option<usize> {
        self.columns.iter().position(|c| (c - value).abs() < 1e-12)
    }
}

const N: Option<f64> = None;

macro_rules! s {
    ($($v:expr),*) => { &[$(Some($v)),*] };
}

pub const TABLE9: Table = Table {
    number: 9,
    problem: 1,
    axis: Axis::Dt,
    columns: &[0.008, 0.016, 0.032, 0.064, 0.128],
    rows: &[
        Row {
            label: "S2A1",
            scheme: "S2A1",
            errors: s![5.8332e-4, 2.3249e-3, 9.1646e-3, 3.4520e-2, 1.0541e-1],
            rates: s![1.99, 1.98, 1.91, 1.61],
        },
        Row {
            label: "S2A2",
            scheme: "S2A2",
            errors: s![5.8332e-4, 2.3249e-3, 9.1646e-3, 3.4520e-2, 1.0541e-1],
            rates: s![1.99, 1.98, 1.91, 1.61],
        },
        Row {
            label: "S2B1",
            scheme: "S2B1",
            errors: s![2.9180e-5, 1.1130e-4, 3.5894e-4, 8.6288e-5, 1.9298e-2],
            rates: &[Some(1.93), Some(1.69), N, Some(7.80)],
        },
        Row {
            label: "S2B2",
            scheme: "S2B2",
            errors: s![2.9181e-5, 1.1130e-4, 3.5894e-4, 8.6303e-5, 1.9298e-2],
            rates: &[Some(1.93), Some(1.69), N, Some(7.80)],
        },
        Row {
            label: "S2C1",
            scheme: "S2C1",
            errors: s![7.0119e-6, 2.2767e-5, 7.0591e-6, 1.2852e-3, 2.4218e-2],
            rates: &[Some(1.70), N, Some(7.51), Some(4.24)],
        },
        Row {
            label: "S2C2",
            scheme: "S2C2",
            errors: s![7.0119e-6, 2.2767e-5, 7.0591e-6, 1.2852e-3, 2.4218e-2],
            rates: &[Some(1.70), N, Some(7.51), Some(4.24)],
        },
        Row {
            label: "IRK24",
            scheme: "IRK24",
            errors: s![4.3674e-7, 6.9798e-6, 1.1117e-4, 1.7460e-3, 2.5869e-2],
            rates: s![4.00, 3.99, 3.97, 3.89],
        },
        Row {
            label: "S2D2",
            scheme: "S2D2",
            errors: s![4.3674e-7, 6.9799e-6, 1.1117e-4, 1.7460e-3, 2.5869e-2],
            rates: s![4.00, 3.99, 3.97, 3.89],
        },
        Row {
            label: "S3A1",
            scheme: "S3A1",
            errors: s![2.8049e-8, 4.4741e-7, 7.0706e-6, 1.0757e-4, 1.3825e-3],
            rates: s![4.00, 3.98, 3.93, 3.68],
        },
        Row {
            label: "S3A2",
            scheme: "S3A2",
            errors: s![2.8050e-8, 4.4742e-7, 7.0707e-6, 1.0757e-4, 1.3825e-3],
            rates: s![4.00, 3.98, 3.93, 3.68],
        },
        Row {
            label: "S3B1",
            scheme: "S3B1",
            errors: s![2.1162e-9, 3.2881e-8, 4.6301e-7, 3.4260e-6, 1.8525e-4],
            rates: s![3.96, 3.82, 2.89, 5.76],
        },
        Row {
            label: "S3B2",
            scheme: "S3B2",
            errors: s![2.1172e-9, 3.2885e-8, 4.6302e-7, 3.4261e-6, 1.8525e-4],
            rates: s![3.96, 3.82, 2.89, 5.76],
        },
        Row {
            label: "S3C1",
            scheme: "S3C1",
            errors: s![5.1955e-10, 7.3011e-9, 5.5070e-8, 3.0021e-6, 2.8187e-4],
            rates: s![3.81, 2.92, 5.77, 6.55],
        },
        Row {
            label: "S3C2",
            scheme: "S3C2",
            errors: s![5.1653e-10, 7.2889e-9, 5.5023e-8, 3.0022e-6, 2.8188e-4],
            rates: s![3.82, 2.92, 5.77, 6.55],
        },
        Row {
            label: "S3D1",
            scheme: "S3D1",
            errors: s![1.7094e-11, 1.2610e-9, 8.1420e-8, 5.1526e-6, 3.1420e-4],
            rates: s![6.20, 6.01, 5.98, 5.93],
        },
        Row {
            label: "IRK36",
            scheme: "IRK36",
            errors: s![2.5843e-11, 1.2752e-9, 8.1475e-8, 5.1528e-6, 3.1420e-4],
            rates: s![5.62, 6.00, 5.98, 5.93],
        },
    ],
};

pub const TABLE10: Table = Table {
    number: 10,
    problem: 2,
    axis: Axis::Dt,
    columns: &[0.016, 0.032, 0.064, 0.128],
    rows: &[
        Row {
            label: "S2A",
            scheme: "S2A1",
            errors: s![1.6303e-3, 6.3090e-3, 2.2161e-2, 5.4964e-2],
            rates: s![1.95, 1.81, 1.31],
        },
        Row {
            label: "S2B",
            scheme: "S2B1",
            errors: s![7.5929e-5, 2.1227e-4, 5.5976e-4, 2.2917e-2],
            rates: s![1.48, 1.40, 5.36],
        },
        Row {
            label: "S2C",
            scheme: "S2C1",
            errors: s![1.3538e-5, 3.4885e-5, 1.5168e-3, 2.6517e-2],
            rates: s![1.36, 5.44, 4.13],
        },
        Row {
            label: "IRK24",
            scheme: "IRK24",
            errors: s![7.4294e-6, 1.1798e-4, 1.8392e-3, 2.7734e-2],
            rates: s![3.99, 3.96, 3.91],
        },
        Row {
            label: "S3A",
            scheme: "S3A2",
            errors: s![5.0629e-7, 7.9574e-6, 1.1828e-4, 1.3524e-3],
            rates: s![3.97, 3.89, 3.51],
        },
        Row {
            label: "S3B",
            scheme: "S3B2",
            errors: s![3.6518e-8, 4.8201e-7, 1.3072e-6, 3.5405e-4],
            rates: s![3.72, 1.44, 8.08],
        },
        Row {
            label: "S3C",
            scheme: "S3C2",
            errors: s![7.6048e-9, 2.1913e-8, 5.8897e-6, 4.5921e-4],
            rates: s![1.53, 8.07, 6.28],
        },
        Row {
            label: "IRK36",
            scheme: "IRK36",
            errors: s![2.0722e-9, 1.3199e-7, 8.2968e-6, 4.9438e-4],
            rates: s![5.99, 5.97, 5.90],
        },
    ],
};

pub const TABLE11: Table = Table {
    number: 11,
    problem: 3,
    axis: Axis::Cfl,
    columns: &[4.0, 7.5, 15.0, 20.0],
    rows: &[
        Row { label: "S2A", scheme: "S2A1", errors: s![5.1067e-3, 1.7668e-2, 6.5196e-2, 1.0463e-1], rates: &[] },
        Row { label: "S2B", scheme: "S2B1", errors: s![2.4235e-4, 6.5231e-4, 1.2859e-3, 7.3554e-3], rates: &[] },
        Row { label: "S2C", scheme: "S2C1", errors: s![4.7893e-5, 8.0395e-5, 3.3978e-3, 1.1517e-2], rates: &[] },
        Row { label: "S2D", scheme: "S2D2", errors: s![2.1471e-5, 2.7127e-4, 4.2438e-3, 1.2967e-2], rates: &[] },
        Row { label: "IRK24", scheme: "IRK24", errors: s![1.9385e-5, 2.7131e-4, 4.2448e-3, 1.2968e-2], rates: &[] },
        Row { label: "S3A", scheme: "S3A1", errors: s![2.5353e-6, 1.7414e-5, 2.5751e-4, 7.4928e-4], rates: &[] },
        Row { label: "S3B", scheme: "S3B1", errors: s![2.4130e-6, 2.9260e-6, 7.0320e-6, 4.0531e-5], rates: &[] },
        Row { label: "S3C", scheme: "S3C1", errors: s![2.4122e-6, 2.6141e-6, 1.2926e-5, 8.4007e-5], rates: &[] },
        Row { label: "S3D", scheme: "S3D1", errors: s![2.4215e-6, 2.6424e-6, 1.9307e-5, 9.9518e-5], rates: &[] },
        Row {
            label: "IRK36",
            scheme: "IRK36",
            errors: &[Some(2.4086e-6), Some(8.6216e-6), Some(4.7991e-5), N],
            rates: &[],
        },
    ],
};

pub const TABLE12: Table = Table {
    number: 12,
    problem: 4,
    axis: Axis::Cfl,
    columns: &[1.0, 1.5, 2.0, 2.5, 3.0],
    rows: &[
        // the N_c = 2.5 entry is printed as 5.5814e-0
        Row {
            label: "S2A",
            scheme: "S2A1",
            errors: s![6.2300e-2, 1.3067e-1, 2.0416e-1, 5.5814, 2.8966e-1],
            rates: &[],
        },
        Row {
            label: "S2B",
            scheme: "S2B1",
            errors: s![1.9867e-3, 1.4744e-3, 6.9368e-3, 2.6593e-2, 6.4304e-2],
            rates: &[],
        },
        Row {
            label: "S2C",
            scheme: "S2C1",
            errors: s![5.0056e-4, 4.3809e-3, 1.5856e-2, 4.0243e-2, 8.2631e-2],
            rates: &[],
        },
        Row {
            label: "S2D",
            scheme: "S2D2",
            errors: s![1.2875e-3, 6.1481e-3, 1.8939e-2, 4.4865e-2, 8.8742e-2],
            rates: &[],
        },
        Row {
            label: "IRK24",
            scheme: "IRK24",
            errors: s![1.2886e-3, 6.1548e-3, 1.8936e-2, 4.4852e-2, 8.8735e-2],
            rates: &[],
        },
        Row {
            label: "S3A",
            scheme: "S3A1",
            errors: s![1.0312e-4, 3.0621e-4, 1.0610e-3, 2.5398e-3, 4.8808e-3],
            rates: &[],
        },
        Row {
            label: "S3B",
            scheme: "S3B1",
            errors: s![6.7960e-5, 6.3170e-5, 6.4138e-5, 1.9789e-4, 6.4027e-4],
            rates: &[],
        },
        Row {
            label: "S3C",
            scheme: "S3C1",
            errors: s![7.2375e-5, 8.5769e-5, 1.2907e-4, 3.6135e-4, 9.7353e-4],
            rates: &[],
        },
        Row {
            label: "S3D",
            scheme: "S3D1",
            errors: s![7.3853e-5, 9.3368e-5, 1.5114e-4, 4.1657e-4, 1.0857e-3],
            rates: &[],
        },
        Row {
            label: "IRK36",
            scheme: "IRK36",
            errors: s![7.4967e-5, 8.6931e-5, 1.5633e-4, 4.2084e-4, 1.0877e-3],
            rates: &[],
        },
    ],
};

pub const TABLE13: Table = Table {
    number: 13,
    problem: 6,
    axis: Axis::Cfl,
    columns: &[0.4, 0.5, 0.6],
    rows: &[
        Row { label: "S2A", scheme: "S2A1", errors: s![5.0352e-4, 7.3966e-4, 1.0006e-3], rates: s![1.72, 1.66] },
        Row { label: "S2B", scheme: "S2B1", errors: s![8.4053e-6, 3.2916e-5, 7.7888e-5], rates: s![6.12, 4.72] },
        Row { label: "S2C", scheme: "S2C1", errors: s![2.5234e-5, 6.0835e-5, 1.2735e-4], rates: s![3.94, 4.05] },
        Row { label: "S2D", scheme: "S2D2", errors: s![3.1786e-5, 7.0696e-5, 1.4104e-4], rates: s![3.58, 3.79] },
        Row { label: "IRK24", scheme: "IRK24", errors: s![3.1787e-5, 7.0696e-5, 1.4104e-4], rates: s![3.58, 3.79] },
    ],
};

pub const TABLE14: Table = Table {
    number: 14,
    problem: 6,
    axis: Axis::Cfl,
    columns: &[0.3, 0.6, 0.9],
    rows: &[
        Row { label: "S3A", scheme: "S3A1", errors: s![1.7805e-7, 2.8985e-6, 1.3927e-5], rates: s![4.02, 3.87] },
        Row { label: "S3B", scheme: "S3B1", errors: s![1.1849e-8, 3.3638e-8, 1.1715e-6], rates: s![1.51, 8.76] },
        Row { label: "S3C", scheme: "S3C1", errors: s![6.2670e-9, 1.4773e-7, 2.1006e-6], rates: s![4.56, 6.55] },
        Row { label: "S3D", scheme: "S3D1", errors: s![7.3068e-9, 2.0673e-7, 2.4117e-6], rates: s![4.82, 6.06] },
        Row { label: "IRK36", scheme: "IRK36", errors: s![7.3060e-9, 2.0673e-7, 2.4117e-6], rates: s![4.82, 6.06] },
    ],
};

pub const TABLES: [&Table; 6] = [&TABLE9, &TABLE10, &TABLE11, &TABLE12, &TABLE13, &TABLE14];

pub fn table(number: u32) -> Option<&'static Table> {
    TABLES.iter().copied().find(|t| t.number == number)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::butcher::scheme_info;

    #[test]
    fn rows_are_rectangular_and_schemes_exist() {
        for t in TABLES {
            for r in t.rows {
                assert_eq!(r.errors.len(), t.columns.len(), "table {} {}", t.number, r.label);
                assert!(r.rates.is_empty() || r.rates.len() + 1 == t.columns.len());
                assert!(scheme_info(r.scheme).is_ok(), "{}", r.scheme);
            }
        }
    }

    #[test]
    fn families() {
        assert_eq!(family_of("IRK24"), "S2D");
        assert_eq!(family_of("S3C2"), "S3C");
        assert_eq!(TABLE9.rows[14].stages(), 3);
        assert_eq!(table(12).unwrap().column_index(2.0), Some(2));
        assert!(table(8).is_none());
    }
}
