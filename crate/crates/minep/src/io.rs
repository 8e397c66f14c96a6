//! JSON game documents: a plain serde mirror of [`QuadGame`] with
//! schema-versioned loading, `"inf"`/`"-inf"` tokens for unbounded box
//! entries, and field-path error messages.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{BoxBounds, LinearSystem, QuadGame};

pub const SCHEMA_VERSION: u32 = 1;

/// A box bound: a finite number or an infinity token.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Num(f64),
    Token(String),
}

impl Bound {
    fn to_f64(&self, path: &str) -> Result<f64> {
        match self {
            Bound::Num(v) if v.is_finite() => Ok(*v),
            Bound::Num(v) => Err(Error::Schema {
                path: path.into(),
                message: format!("non-finite number {v}; use \"inf\" or \"-inf\""),
            }),
            Bound::Token(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(Error::Schema {
                    path: path.into(),
                    message: format!("unknown bound token {other:?}"),
                }),
            },
        }
    }

    fn from_f64(v: f64) -> Self {
        if v == f64::INFINITY {
            Bound::Token("inf".into())
        } else if v == f64::NEG_INFINITY {
            Bound::Token("-inf".into())
        } else {
            Bound::Num(v)
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawPlayer {
    pub dim: usize,
    pub integers: usize,
    /// Row-major coupling blocks, one per player in the game (self included).
    pub q: Vec<Vec<Vec<f64>>>,
    pub c: Vec<f64>,
    pub lower: Vec<Bound>,
    pub upper: Vec<Bound>,
    #[serde(default)]
    pub ineq_a: Vec<Vec<f64>>,
    #[serde(default)]
    pub ineq_b: Vec<f64>,
    #[serde(default)]
    pub eq_a: Vec<Vec<f64>>,
    #[serde(default)]
    pub eq_b: Vec<f64>,
    #[serde(default)]
    pub offset: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameDocument {
    pub schema: u32,
    pub players: Vec<RawPlayer>,
}

fn matrix_from_rows(rows: &[Vec<f64>], ncols: usize, path: &str) -> Result<DMatrix<f64>> {
    for (i, r) in rows.iter().enumerate() {
        if r.len() != ncols {
            return Err(Error::Schema {
                path: format!("{path}[{i}]"),
                message: format!("expected {ncols} columns, found {}", r.len()),
            });
        }
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(rows.len(), ncols, &flat))
}

impl GameDocument {
    pub fn from_game(game: &QuadGame) -> Self {
        let players = (0..game.n_players())
            .map(|nu| {
                let mat_rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
                    (0..m.nrows())
                        .map(|r| m.row(r).iter().copied().collect())
                        .collect()
                };
                RawPlayer {
                    dim: game.dims[nu],
                    integers: game.int_counts[nu],
                    q: game.q_blocks[nu].iter().map(&mat_rows).collect(),
                    c: game.c[nu].iter().copied().collect(),
                    lower: game.boxes[nu]
                        .lower
                        .iter()
                        .map(|&v| Bound::from_f64(v))
                        .collect(),
                    upper: game.boxes[nu]
                        .upper
                        .iter()
                        .map(|&v| Bound::from_f64(v))
                        .collect(),
                    ineq_a: mat_rows(&game.lin_ineq[nu].a),
                    ineq_b: game.lin_ineq[nu].b.iter().copied().collect(),
                    eq_a: mat_rows(&game.lin_eq[nu].a),
                    eq_b: game.lin_eq[nu].b.iter().copied().collect(),
                    offset: game.offsets[nu],
                }
            })
            .collect();
        Self {
            schema: SCHEMA_VERSION,
            players,
        }
    }

    pub fn to_game(&self) -> Result<QuadGame> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Schema {
                path: "schema".into(),
                message: format!(
                    "version {} not supported (expected {SCHEMA_VERSION})",
                    self.schema
                ),
            });
        }
        let n = self.players.len();
        let dims: Vec<usize> = self.players.iter().map(|p| p.dim).collect();
        let mut q_blocks = Vec::with_capacity(n);
        let mut c = Vec::with_capacity(n);
        let mut boxes = Vec::with_capacity(n);
        let mut lin_ineq = Vec::with_capacity(n);
        let mut lin_eq = Vec::with_capacity(n);
        for (nu, p) in self.players.iter().enumerate() {
            if p.q.len() != n {
                return Err(Error::Schema {
                    path: format!("players[{nu}].q"),
                    message: format!("expected {n} blocks, found {}", p.q.len()),
                });
            }
            let mut row = Vec::with_capacity(n);
            for (nv, blk) in p.q.iter().enumerate() {
                let path = format!("players[{nu}].q[{nv}]");
                if blk.len() != p.dim {
                    return Err(Error::Schema {
                        path,
                        message: format!("expected {} rows, found {}", p.dim, blk.len()),
                    });
                }
                row.push(matrix_from_rows(blk, dims[nv], &path)?);
            }
            q_blocks.push(row);
            c.push(DVector::from_vec(p.c.clone()));
            let lower = p
                .lower
                .iter()
                .enumerate()
                .map(|(j, b)| b.to_f64(&format!("players[{nu}].lower[{j}]")))
                .collect::<Result<Vec<f64>>>()?;
            let upper = p
                .upper
                .iter()
                .enumerate()
                .map(|(j, b)| b.to_f64(&format!("players[{nu}].upper[{j}]")))
                .collect::<Result<Vec<f64>>>()?;
            boxes.push(BoxBounds::new(
                DVector::from_vec(lower),
                DVector::from_vec(upper),
            ));
            let a = matrix_from_rows(&p.ineq_a, p.dim, &format!("players[{nu}].ineq_a"))?;
            if p.ineq_b.len() != a.nrows() {
                return Err(Error::Schema {
                    path: format!("players[{nu}].ineq_b"),
                    message: format!("expected {} entries, found {}", a.nrows(), p.ineq_b.len()),
                });
            }
            lin_ineq.push(LinearSystem {
                a,
                b: DVector::from_vec(p.ineq_b.clone()),
            });
            let e = matrix_from_rows(&p.eq_a, p.dim, &format!("players[{nu}].eq_a"))?;
            if p.eq_b.len() != e.nrows() {
                return Err(Error::Schema {
                    path: format!("players[{nu}].eq_b"),
                    message: format!("expected {} entries, found {}", e.nrows(), p.eq_b.len()),
                });
            }
            lin_eq.push(LinearSystem {
                a: e,
                b: DVector::from_vec(p.eq_b.clone()),
            });
        }
        let int_counts = self.players.iter().map(|p| p.integers).collect();
        let offsets = self.players.iter().map(|p| p.offset).collect();
        Ok(
            QuadGame::new(dims, int_counts, q_blocks, c, boxes, lin_ineq, lin_eq)?
                .with_offsets(offsets),
        )
    }
}

pub fn save_game(path: &Path, game: &QuadGame) -> Result<()> {
    let doc = GameDocument::from_game(game);
    let json = serde_json::to_string_pretty(&doc)?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn load_game(path: &Path) -> Result<QuadGame> {
    let text = std::fs::read_to_string(path)?;
    let doc: GameDocument = serde_json::from_str(&text)?;
    doc.to_game()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    fn roundtrip(game: &QuadGame) -> QuadGame {
        let doc = GameDocument::from_game(game);
        let json = serde_json::to_string(&doc).unwrap();
        let back: GameDocument = serde_json::from_str(&json).unwrap();
        back.to_game().unwrap()
    }

    #[test]
    fn fixtures_roundtrip_exactly() {
        for id in fixtures::FIXTURE_IDS {
            let g = fixtures::by_name(id).unwrap();
            assert_eq!(roundtrip(&g), g, "{id}");
        }
    }

    #[test]
    fn infinite_bounds_roundtrip_via_tokens() {
        let mut g = fixtures::example_5();
        g.boxes[0] = BoxBounds::free(1);
        g.int_counts = vec![0, 1];
        let doc = GameDocument::from_game(&g);
        let json = serde_json::to_string(&doc).unwrap();
        assert!(json.contains("\"inf\"") && json.contains("\"-inf\""));
        assert_eq!(roundtrip(&g), g);
    }

    #[test]
    fn schema_version_is_checked() {
        let mut doc = GameDocument::from_game(&fixtures::example_5());
        doc.schema = 99;
        match doc.to_game() {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "schema"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn field_paths_locate_bad_data() {
        let mut doc = GameDocument::from_game(&fixtures::example_4());
        doc.players[1].q[2][0].push(7.0); // extra column
        match doc.to_game() {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "players[1].q[2][0]"),
            other => panic!("expected schema error, got {other:?}"),
        }
        let mut doc = GameDocument::from_game(&fixtures::example_4());
        doc.players[0].upper[0] = Bound::Token("huge".into());
        match doc.to_game() {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "players[0].upper[0]"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn save_and_load_through_a_file() {
        let dir = std::env::temp_dir().join("minep-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("example-6.json");
        let g = fixtures::example_6(3.0);
        save_game(&path, &g).unwrap();
        assert_eq!(load_game(&path).unwrap(), g);
    }

    fn arbitrary_small_game() -> impl Strategy<Value = QuadGame> {
        // Two scalar players with random coupling, linear terms and bounds.
        (
            1.0f64..5.0,
            1.0f64..5.0,
            -2.0f64..2.0,
            -2.0f64..2.0,
            prop::collection::vec(-3.0f64..3.0, 2),
            -8.0f64..-1.0,
            1.0f64..8.0,
        )
            .prop_map(|(q1, q2, e12, e21, c, lo, hi)| fixtures_like(q1, q2, e12, e21, &c, lo, hi))
    }

    fn fixtures_like(
        q1: f64,
        q2: f64,
        e12: f64,
        e21: f64,
        c: &[f64],
        lo: f64,
        hi: f64,
    ) -> QuadGame {
        use nalgebra::{DMatrix, DVector};
        QuadGame::boxed(
            vec![1, 1],
            vec![1, 0],
            vec![
                vec![
                    DMatrix::from_element(1, 1, q1),
                    DMatrix::from_element(1, 1, e12),
                ],
                vec![
                    DMatrix::from_element(1, 1, e21),
                    DMatrix::from_element(1, 1, q2),
                ],
            ],
            vec![
                DVector::from_element(1, c[0]),
                DVector::from_element(1, c[1]),
            ],
            vec![
                BoxBounds::interval(1, lo.floor(), hi.ceil()),
                BoxBounds::interval(1, lo, hi),
            ],
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn random_games_roundtrip_exactly(g in arbitrary_small_game()) {
            prop_assert_eq!(roundtrip(&g), g);
        }
    }
}
