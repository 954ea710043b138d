//! Sobol low-discrepancy points with optional affine digital scrambling.
//!
//! Points are generated in Gray-code order from 32-bit direction numbers.
//! The direction-number table is the bundled `data/sobol_directions.txt`
//! (one line per dimension: degree, coefficient mask, initial m values).
//!
//! Scrambling applies, per dimension, a random lower-triangular binary
//! matrix with unit diagonal to the digits of every point and then XORs a
//! random digital shift. Both maps are bijections on every leading block of
//! digits, so the (0,1)-net structure of each coordinate survives.

use std::sync::OnceLock;

use crate::error::{Error, Result};

use super::rng::RandomStream;
use super::UnitPointSet;

const BITS: usize = 32;
const TABLE_SOURCE: &str = include_str!("../../data/sobol_directions.txt");

/// Primitive polynomial and initial direction integers for one dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionEntry {
    pub degree: u32,
    /// Interior polynomial coefficients, highest degree first.
    pub mask: u32,
    pub initial: Vec<u32>,
}

impl DirectionEntry {
    /// Expands the entry into the 32 direction numbers `v_1..v_32`, each
    /// stored left-aligned in a `u32` (bit 31 is the first binary digit).
    fn direction_numbers(&self) -> [u32; BITS] {
        let mut v = [0u32; BITS];
        if self.degree == 0 {
            for (k, slot) in v.iter_mut().enumerate() {
                *slot = 1u32 << (BITS - 1 - k);
            }
            return v;
        }
        let s = self.degree as usize;
        for k in 0..s.min(BITS) {
            v[k] = self.initial[k] << (BITS - 1 - k);
        }
        for k in s..BITS {
            let mut value = v[k - s] ^ (v[k - s] >> s);
            for j in 1..s {
                if (self.mask >> (s - 1 - j)) & 1 == 1 {
                    value ^= v[k - j];
                }
            }
            v[k] = value;
        }
        v
    }
}

/// Parses a direction-number table. Blank lines and `#` comments are skipped.
pub fn parse_direction_table(source: &str) -> Result<Vec<DirectionEntry>> {
    let mut entries = Vec::new();
    for (number, raw) in source.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |reason: &str| Error::DirectionTable {
            line: number + 1,
            reason: reason.to_string(),
        };
        let fields = line
            .split_whitespace()
            .map(|f| f.parse::<u32>().map_err(|_| bad("non-integer field")))
            .collect::<Result<Vec<_>>>()?;
        if fields.len() < 2 {
            return Err(bad("expected degree and coefficient mask"));
        }
        let (degree, mask) = (fields[0], fields[1]);
        let initial = fields[2..].to_vec();
        if initial.len() != degree as usize {
            return Err(bad("number of initial direction integers differs from degree"));
        }
        if degree as usize > BITS {
            return Err(bad("degree exceeds 32"));
        }
        if degree > 0 && mask >> (degree - 1) != 0 {
            return Err(bad("coefficient mask wider than degree - 1 bits"));
        }
        for (k, &m) in initial.iter().enumerate() {
            if m % 2 == 0 || m >= 1 << (k + 1) {
                return Err(bad("initial direction integer m_k must be odd and below 2^k"));
            }
        }
        entries.push(DirectionEntry {
            degree,
            mask,
            initial,
        });
    }
    Ok(entries)
}

fn bundled_directions() -> &'static [[u32; BITS]] {
    static DIRECTIONS: OnceLock<Vec<[u32; BITS]>> = OnceLock::new();
    DIRECTIONS.get_or_init(|| {
        parse_direction_table(TABLE_SOURCE)
            .expect("bundled Sobol table is well formed")
            .iter()
            .map(DirectionEntry::direction_numbers)
            .collect()
    })
}

/// Number of dimensions the bundled direction-number table supports.
pub fn max_dimension() -> usize {
    bundled_directions().len()
}

/// Applies a lower-triangular digit matrix to a left-aligned 32-digit value.
/// `rows[r]` holds the matrix row for output digit `r + 1`, as a bit mask
/// over input digits in the same left-aligned layout.
fn apply_digit_matrix(rows: &[u32; BITS], value: u32) -> u32 {
    let mut out = 0u32;
    for (r, &row) in rows.iter().enumerate() {
        if (row & value).count_ones() % 2 == 1 {
            out |= 1 << (BITS - 1 - r);
        }
    }
    out
}

fn random_lower_triangular(stream: &mut RandomStream) -> [u32; BITS] {
    let mut rows = [0u32; BITS];
    for (r, row) in rows.iter_mut().enumerate() {
        let diagonal = 1u32 << (BITS - 1 - r);
        // digits strictly more significant than the diagonal
        let above = !((diagonal << 1).wrapping_sub(1));
        *row = (stream.next_u32() & above) | diagonal;
    }
    rows
}

/// First `n` points of the `d`-dimensional Sobol sequence.
///
/// With `scramble` set, the stream supplies for each dimension a random
/// linear digit matrix followed by a random digital shift.
pub fn draw_sobol(n: usize, d: usize, stream: &mut RandomStream, scramble: bool) -> Result<UnitPointSet> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument(format!(
            "Sobol draw needs n >= 1 and d >= 1 (got n = {n}, d = {d})"
        )));
    }
    let table = bundled_directions();
    if d > table.len() {
        return Err(Error::UnsupportedDimension {
            requested: d,
            supported: table.len(),
        });
    }
    if n as u64 > u32::MAX as u64 {
        return Err(Error::InvalidArgument(format!("Sobol draw of {n} points exceeds 2^32 - 1")));
    }

    let mut directions: Vec<[u32; BITS]> = table[..d].to_vec();
    let mut shifts = vec![0u32; d];
    if scramble {
        for (dims, shift) in directions.iter_mut().zip(shifts.iter_mut()) {
            let matrix = random_lower_triangular(stream);
            for v in dims.iter_mut() {
                *v = apply_digit_matrix(&matrix, *v);
            }
            *shift = stream.next_u32();
        }
    }

    let scale = 1.0 / (1u64 << BITS) as f64;
    let mut state = vec![0u32; d];
    let mut values = Vec::with_capacity(n * d);
    for i in 0..n {
        if i > 0 {
            // Gray-code update: flip the direction number of the lowest zero
            // bit of i - 1.
            let bit = (i - 1).trailing_ones() as usize;
            for (x, dims) in state.iter_mut().zip(&directions) {
                *x ^= dims[bit];
            }
        }
        values.extend(state.iter().zip(&shifts).map(|(&x, &s)| (x ^ s) as f64 * scale));
    }
    UnitPointSet::from_row_major(n, d, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table_has_at_least_ten_dimensions() {
        assert!(max_dimension() >= 10);
    }

    #[test]
    fn first_points_in_one_dimension() {
        let mut stream = RandomStream::new(0);
        let set = draw_sobol(4, 1, &mut stream, false).unwrap();
        assert_eq!(set.column(0), vec![0.0, 0.5, 0.75, 0.25]);
    }

    #[test]
    fn known_two_dimensional_prefix() {
        let mut stream = RandomStream::new(0);
        let set = draw_sobol(8, 2, &mut stream, false).unwrap();
        assert_eq!(set.column(0), vec![0.0, 0.5, 0.75, 0.25, 0.375, 0.875, 0.625, 0.125]);
        assert_eq!(set.column(1), vec![0.0, 0.5, 0.25, 0.75, 0.375, 0.875, 0.125, 0.625]);
    }

    #[test]
    fn rejects_dimension_beyond_table() {
        let mut stream = RandomStream::new(0);
        let err = draw_sobol(4, max_dimension() + 1, &mut stream, false).unwrap_err();
        assert!(matches!(err, Error::UnsupportedDimension { .. }));
    }

    #[test]
    fn table_parser_reports_bad_lines() {
        assert!(parse_direction_table("0 0\n2 1 1 3\n").is_ok());
        let err = parse_direction_table("0 0\n2 1 1\n").unwrap_err();
        assert!(matches!(err, Error::DirectionTable { line: 2, .. }));
        assert!(parse_direction_table("2 1 1 4\n").is_err());
        assert!(parse_direction_table("2 x 1 3\n").is_err());
    }

    #[test]
    fn digit_matrix_identity_and_lower_triangularity() {
        let mut identity = [0u32; BITS];
        for (r, row) in identity.iter_mut().enumerate() {
            *row = 1 << (BITS - 1 - r);
        }
        assert_eq!(apply_digit_matrix(&identity, 0xdead_beef), 0xdead_beef);

        let mut stream = RandomStream::new(11);
        let rows = random_lower_triangular(&mut stream);
        for (r, &row) in rows.iter().enumerate() {
            let diagonal = 1u32 << (BITS - 1 - r);
            assert_ne!(row & diagonal, 0);
            // nothing at or below the diagonal other than the diagonal itself
            assert_eq!(row & (diagonal - 1), 0);
        }
    }
}
