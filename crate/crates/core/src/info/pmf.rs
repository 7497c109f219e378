//! Dense joint probability tables over named finite-alphabet variables, plus
//! conditional-probability kernels and chain-rule assembly.

use super::{check_disjoint, kahan_sum, InfoError, VarSet, NORM_TOL, SIZE_GUARD};

/// A joint pmf stored as a dense row-major array. Axis order is significant:
/// the last axis varies fastest.
#[derive(Debug, Clone)]
pub struct JointPmf {
    axes: Vec<(String, usize)>,
    probs: Vec<f64>,
}

impl JointPmf {
    /// Build a validated joint table. `probs` is row-major in axis order.
    pub fn new(axes: Vec<(String, usize)>, probs: Vec<f64>) -> Result<Self, InfoError> {
        let mut cells: u128 = 1;
        for (name, card) in &axes {
            if *card == 0 {
                return Err(InfoError::DimensionMismatch {
                    context: format!("axis `{name}`"),
                    got: 0,
                    want: 1,
                });
            }
            if axes.iter().filter(|(n, _)| n == name).count() > 1 {
                return Err(InfoError::DuplicateName(name.clone()));
            }
            cells *= *card as u128;
        }
        if cells > SIZE_GUARD as u128 {
            return Err(InfoError::SizeGuardExceeded { cells });
        }
        if probs.len() as u128 != cells {
            return Err(InfoError::DimensionMismatch {
                context: "joint table".into(),
                got: probs.len(),
                want: cells as usize,
            });
        }
        for (i, &p) in probs.iter().enumerate() {
            if p < 0.0 {
                return Err(InfoError::NegativeProbability {
                    context: format!("cell {i}"),
                    value: p,
                });
            }
        }
        let sum = kahan_sum(probs.iter().copied());
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(InfoError::NotNormalized {
                context: "joint table".into(),
                sum,
            });
        }
        Ok(JointPmf { axes, probs })
    }

    pub fn axes(&self) -> &[(String, usize)] {
        &self.axes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn cells(&self) -> usize {
        self.probs.len()
    }

    fn axis_index(&self, name: &str) -> Result<usize, InfoError> {
        self.axes
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| InfoError::UnknownVariable(name.to_string()))
    }

    /// Probability of a single cell addressed by per-axis coordinates.
    pub fn at(&self, coords: &[usize]) -> f64 {
        debug_assert_eq!(coords.len(), self.axes.len());
        let mut flat = 0usize;
        for (i, &(_, card)) in self.axes.iter().enumerate() {
            debug_assert!(coords[i] < card);
            flat = flat * card + coords[i];
        }
        self.probs[flat]
    }

    /// Sum out every axis not in `keep`; output axis order follows `keep`.
    pub fn marginalize(&self, keep: &VarSet) -> Result<JointPmf, InfoError> {
        let keep_idx: Vec<usize> = keep
            .names()
            .iter()
            .map(|n| self.axis_index(n))
            .collect::<Result<_, _>>()?;
        let out_axes: Vec<(String, usize)> =
            keep_idx.iter().map(|&i| self.axes[i].clone()).collect();
        let out_len: usize = out_axes.iter().map(|(_, c)| c).product::<usize>().max(1);
        let mut out = vec![0.0f64; out_len];

        // Per-input-axis stride into the output index (0 for summed axes).
        let mut out_stride = vec![0usize; self.axes.len()];
        let mut stride = 1usize;
        for &i in keep_idx.iter().rev() {
            out_stride[i] = stride;
            stride *= self.axes[i].1;
        }

        let cards: Vec<usize> = self.axes.iter().map(|(_, c)| *c).collect();
        let mut coords = vec![0usize; cards.len()];
        let mut out_idx = 0usize;
        for &p in &self.probs {
            out[out_idx] += p;
            // mixed-radix increment, keeping out_idx in step
            for ax in (0..cards.len()).rev() {
                coords[ax] += 1;
                out_idx += out_stride[ax];
                if coords[ax] < cards[ax] {
                    break;
                }
                coords[ax] = 0;
                out_idx -= out_stride[ax] * cards[ax];
            }
        }
        Ok(JointPmf {
            axes: out_axes,
            probs: out,
        })
    }

    /// Shannon entropy H(A) in bits of the marginal on `a`, with 0 log 0 = 0.
    pub fn entropy(&self, a: &VarSet) -> Result<f64, InfoError> {
        // Canonicalize to the joint's axis order so summation order, and hence
        // the floating-point result, does not depend on the caller's ordering.
        let canon = self.canonical_subset(a)?;
        let m = self.marginalize(&canon)?;
        let h = kahan_sum(
            m.probs
                .iter()
                .filter(|&&p| p > 0.0)
                .map(|&p| -p * p.log2()),
        );
        Ok(h.max(0.0))
    }

    /// Conditional mutual information I(A;B|C) in bits.
    ///
    /// Computed as H(AC) + H(BC) - H(C) - H(ABC) after first reducing to the
    /// marginal on A∪B∪C. Values within 1e-12 below zero are clamped to 0.
    pub fn cond_mi(&self, a: &VarSet, b: &VarSet, c: &VarSet) -> Result<f64, InfoError> {
        check_disjoint(&[a, b, c])?;
        let all = self.canonical_subset(&a.joined(b).joined(c))?;
        let reduced = self.marginalize(&all)?;
        let h_ac = reduced.entropy(&a.joined(c))?;
        let h_bc = reduced.entropy(&b.joined(c))?;
        let h_c = if c.is_empty() {
            0.0
        } else {
            reduced.entropy(c)?
        };
        let h_abc = reduced.entropy(&all)?;
        let mi = h_ac + h_bc - h_c - h_abc;
        if mi < 0.0 && mi > -NORM_TOL {
            return Ok(0.0);
        }
        Ok(mi)
    }

    /// The subset `s` reordered to this joint's axis order.
    fn canonical_subset(&self, s: &VarSet) -> Result<VarSet, InfoError> {
        for n in s.names() {
            self.axis_index(n)?;
        }
        Ok(VarSet::of(
            self.axes
                .iter()
                .map(|(n, _)| n.clone())
                .filter(|n| s.contains(n)),
        ))
    }
}

/// A conditional probability table P(outputs | parents).
///
/// `table` is parent-major, output-minor: entry index is
/// `parent_flat * prod(output cards) + output_flat`, both flattened row-major
/// in declaration order. Parent cardinalities are resolved at assembly time.
#[derive(Debug, Clone)]
pub struct FactorKernel {
    outputs: Vec<(String, usize)>,
    parents: Vec<String>,
    table: Vec<f64>,
}

impl FactorKernel {
    pub fn new(
        outputs: Vec<(String, usize)>,
        parents: Vec<String>,
        table: Vec<f64>,
    ) -> Result<Self, InfoError> {
        let mut seen: Vec<&str> = Vec::new();
        for (n, c) in &outputs {
            if *c == 0 {
                return Err(InfoError::DimensionMismatch {
                    context: format!("output `{n}`"),
                    got: 0,
                    want: 1,
                });
            }
            if seen.contains(&n.as_str()) {
                return Err(InfoError::DuplicateName(n.clone()));
            }
            seen.push(n);
        }
        for p in &parents {
            if seen.contains(&p.as_str()) {
                return Err(InfoError::DuplicateName(p.clone()));
            }
            seen.push(p);
        }
        let out_size: usize = outputs.iter().map(|(_, c)| c).product();
        if out_size == 0 || table.is_empty() || table.len() % out_size != 0 {
            return Err(InfoError::DimensionMismatch {
                context: "kernel table".into(),
                got: table.len(),
                want: out_size.max(1),
            });
        }
        for (i, &v) in table.iter().enumerate() {
            if v < 0.0 {
                return Err(InfoError::NegativeProbability {
                    context: format!("kernel entry {i}"),
                    value: v,
                });
            }
        }
        for (slice_no, slice) in table.chunks(out_size).enumerate() {
            let s = kahan_sum(slice.iter().copied());
            if (s - 1.0).abs() > NORM_TOL {
                return Err(InfoError::NotNormalized {
                    context: format!("kernel slice {slice_no}"),
                    sum: s,
                });
            }
        }
        Ok(FactorKernel {
            outputs,
            parents,
            table,
        })
    }

    /// Same table bound to different variable names (used to instantiate one
    /// kernel for both the previous-block and current-block tuples).
    pub fn renamed(&self, outputs: &[&str], parents: &[&str]) -> Result<FactorKernel, InfoError> {
        if outputs.len() != self.outputs.len() {
            return Err(InfoError::DimensionMismatch {
                context: "renamed outputs".into(),
                got: outputs.len(),
                want: self.outputs.len(),
            });
        }
        if parents.len() != self.parents.len() {
            return Err(InfoError::DimensionMismatch {
                context: "renamed parents".into(),
                got: parents.len(),
                want: self.parents.len(),
            });
        }
        FactorKernel::new(
            self.outputs
                .iter()
                .zip(outputs)
                .map(|((_, c), n)| (n.to_string(), *c))
                .collect(),
            parents.iter().map(|p| p.to_string()).collect(),
            self.table.clone(),
        )
    }

    pub fn outputs(&self) -> &[(String, usize)] {
        &self.outputs
    }

    pub fn parents(&self) -> &[String] {
        &self.parents
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn out_size(&self) -> usize {
        self.outputs.iter().map(|(_, c)| c).product()
    }

    /// Largest deviation of any conditional slice from unit mass.
    pub fn normalization_deviation(&self) -> f64 {
        self.table
            .chunks(self.out_size())
            .map(|s| (kahan_sum(s.iter().copied()) - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Chain-rule assembly: the product of the kernels, applied in order.
///
/// Each kernel's parents must already be present; outputs must be new names.
pub fn assemble_joint(kernels: &[FactorKernel]) -> Result<JointPmf, InfoError> {
    let mut axes: Vec<(String, usize)> = Vec::new();
    let mut probs: Vec<f64> = vec![1.0];
    for k in kernels {
        apply_kernel(&mut axes, &mut probs, k)?;
    }
    JointPmf::new(axes, probs)
}

/// Extend a partial joint by one kernel (exposed for staged assemblies).
pub(crate) fn apply_kernel(
    axes: &mut Vec<(String, usize)>,
    probs: &mut Vec<f64>,
    k: &FactorKernel,
) -> Result<(), InfoError> {
    for (n, _) in &k.outputs {
        if axes.iter().any(|(a, _)| a == n) {
            return Err(InfoError::DuplicateName(n.clone()));
        }
    }
    let parent_idx: Vec<usize> = k
        .parents
        .iter()
        .map(|p| {
            axes.iter()
                .position(|(n, _)| n == p)
                .ok_or_else(|| InfoError::UnknownParent(p.clone()))
        })
        .collect::<Result<_, _>>()?;
    let parent_cards: Vec<usize> = parent_idx.iter().map(|&i| axes[i].1).collect();
    let parent_size: usize = parent_cards.iter().product();
    let out_size = k.out_size();
    if k.table.len() != parent_size * out_size {
        return Err(InfoError::DimensionMismatch {
            context: "kernel table vs parent cardinalities".into(),
            got: k.table.len(),
            want: parent_size * out_size,
        });
    }
    let new_cells = probs.len() as u128 * out_size as u128;
    if new_cells > SIZE_GUARD as u128 {
        return Err(InfoError::SizeGuardExceeded { cells: new_cells });
    }

    let cards: Vec<usize> = axes.iter().map(|(_, c)| *c).collect();
    let mut out = vec![0.0f64; new_cells as usize];
    let mut coords = vec![0usize; cards.len()];
    for (flat, &p) in probs.iter().enumerate() {
        let mut pflat = 0usize;
        for (j, &i) in parent_idx.iter().enumerate() {
            pflat = pflat * parent_cards[j] + coords[i];
        }
        let slice = &k.table[pflat * out_size..(pflat + 1) * out_size];
        let dst = &mut out[flat * out_size..(flat + 1) * out_size];
        for (d, &t) in dst.iter_mut().zip(slice) {
            *d = p * t;
        }
        for ax in (0..cards.len()).rev() {
            coords[ax] += 1;
            if coords[ax] < cards[ax] {
                break;
            }
            coords[ax] = 0;
        }
    }
    axes.extend(k.outputs.iter().cloned());
    *probs = out;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_bit(name: &str) -> FactorKernel {
        FactorKernel::new(vec![(name.into(), 2)], vec![], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn independence_of_parentless_kernels() {
        let j = assemble_joint(&[uniform_bit("X"), uniform_bit("Y")]).unwrap();
        assert_eq!(j.cells(), 4);
        for &p in j.probs() {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn z_channel_hand_multiplication() {
        // P(X)=Bern(0.5); Y|X=0 -> 0, Y|X=1 -> 0 w.p. 0.3.
        let x = uniform_bit("X");
        let y = FactorKernel::new(
            vec![("Y".into(), 2)],
            vec!["X".into()],
            vec![1.0, 0.0, 0.3, 0.7],
        )
        .unwrap();
        let j = assemble_joint(&[x, y]).unwrap();
        assert!((j.at(&[1, 0]) - 0.15).abs() < 1e-15);
        let sum = kahan_sum(j.probs().iter().copied());
        assert!((sum - 1.0).abs() < 1e-12);
        let my = j.marginalize(&VarSet::of(["Y"])).unwrap();
        assert!((my.probs()[1] - 0.35).abs() < 1e-15);
    }

    #[test]
    fn first_kernel_marginal_is_preserved() {
        let x = FactorKernel::new(vec![("X".into(), 3)], vec![], vec![0.2, 0.5, 0.3]).unwrap();
        let y = FactorKernel::new(
            vec![("Y".into(), 2)],
            vec!["X".into()],
            vec![0.9, 0.1, 0.4, 0.6, 0.25, 0.75],
        )
        .unwrap();
        let j = assemble_joint(&[x, y]).unwrap();
        let mx = j.marginalize(&VarSet::of(["X"])).unwrap();
        for (got, want) in mx.probs().iter().zip([0.2, 0.5, 0.3]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn marginalize_keep_all_is_identity() {
        let j = assemble_joint(&[uniform_bit("A"), uniform_bit("B")]).unwrap();
        let m = j.marginalize(&VarSet::of(["A", "B"])).unwrap();
        assert_eq!(m.probs(), j.probs());
        // keep order is respected
        let swapped = j.marginalize(&VarSet::of(["B", "A"])).unwrap();
        assert_eq!(swapped.axes()[0].0, "B");
    }

    #[test]
    fn marginalize_unknown_variable() {
        let j = assemble_joint(&[uniform_bit("A")]).unwrap();
        assert!(matches!(
            j.marginalize(&VarSet::of(["Q"])),
            Err(InfoError::UnknownVariable(_))
        ));
    }

    #[test]
    fn entropy_basics() {
        let j = assemble_joint(&[uniform_bit("X")]).unwrap();
        assert!((j.entropy(&VarSet::of(["X"])).unwrap() - 1.0).abs() < 1e-15);

        let det =
            assemble_joint(&[
                FactorKernel::new(vec![("D".into(), 2)], vec![], vec![1.0, 0.0]).unwrap()
            ])
            .unwrap();
        assert_eq!(det.entropy(&VarSet::of(["D"])).unwrap(), 0.0);

        let bern = assemble_joint(&[FactorKernel::new(
            vec![("B".into(), 2)],
            vec![],
            vec![0.89, 0.11],
        )
        .unwrap()])
        .unwrap();
        // independent oracle: direct binary entropy formula
        let want = -(0.11f64 * 0.11f64.log2() + 0.89 * 0.89f64.log2());
        assert!((bern.entropy(&VarSet::of(["B"])).unwrap() - want).abs() < 1e-14);
        assert!((want - 0.4999188).abs() < 1e-6);
    }

    #[test]
    fn cond_mi_xor_and_adder() {
        let xor = FactorKernel::new(
            vec![("Y".into(), 2)],
            vec!["X1".into(), "X2".into()],
            vec![1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0],
        )
        .unwrap();
        let j = assemble_joint(&[uniform_bit("X1"), uniform_bit("X2"), xor]).unwrap();
        let mi = j
            .cond_mi(&VarSet::of(["X1"]), &VarSet::of(["Y"]), &VarSet::of(["X2"]))
            .unwrap();
        assert!((mi - 1.0).abs() < 1e-12);

        let adder = FactorKernel::new(
            vec![("S".into(), 3)],
            vec!["X1".into(), "X2".into()],
            vec![
                1.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, //
                0.0, 0.0, 1.0,
            ],
        )
        .unwrap();
        let j2 = assemble_joint(&[uniform_bit("X1"), uniform_bit("X2"), adder]).unwrap();
        let mi2 = j2
            .cond_mi(
                &VarSet::of(["X1", "X2"]),
                &VarSet::of(["S"]),
                &VarSet::empty(),
            )
            .unwrap();
        assert!((mi2 - 1.5).abs() < 1e-12);
    }

    #[test]
    fn cond_mi_independent_is_zero() {
        let j = assemble_joint(&[uniform_bit("A"), uniform_bit("B"), uniform_bit("C")]).unwrap();
        let mi = j
            .cond_mi(&VarSet::of(["A"]), &VarSet::of(["B"]), &VarSet::of(["C"]))
            .unwrap();
        assert_eq!(mi, 0.0);
    }

    #[test]
    fn cond_mi_rejects_overlap() {
        let j = assemble_joint(&[uniform_bit("A"), uniform_bit("B")]).unwrap();
        assert!(matches!(
            j.cond_mi(&VarSet::of(["A"]), &VarSet::of(["A"]), &VarSet::empty()),
            Err(InfoError::OverlappingSets(_))
        ));
    }

    #[test]
    fn kernel_rejects_unnormalized_slice() {
        assert!(matches!(
            FactorKernel::new(vec![("Y".into(), 2)], vec![], vec![0.6, 0.5]),
            Err(InfoError::NotNormalized { .. })
        ));
    }

    #[test]
    fn assembly_rejects_unknown_parent_and_size_guard() {
        let k = FactorKernel::new(
            vec![("Y".into(), 2)],
            vec!["MISSING".into()],
            vec![0.5, 0.5, 0.5, 0.5],
        )
        .unwrap();
        assert!(matches!(
            assemble_joint(&[k]),
            Err(InfoError::UnknownParent(_))
        ));

        let big: Vec<FactorKernel> = (0..27)
            .map(|i| uniform_bit(&format!("B{i}")))
            .collect();
        assert!(matches!(
            assemble_joint(&big),
            Err(InfoError::SizeGuardExceeded { .. })
        ));
    }
}
