//! Numeric coefficients of the closed-form expressions.
//!
//! Every closed form reads its integer coefficients from the active table
//! instead of hard-coding them. The default table is exact; a perturbed
//! table can be installed for the current thread to check that the
//! validation suite notices a wrong coefficient (`nli validate --perturb`).
//! The oracles (Wick moments, Fock simulation, numeric optimizer) never
//! consult this table.

use std::cell::Cell;

macro_rules! constant_table {
    ($( $(#[$doc:meta])* $name:ident = $value:expr ),+ $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct ClosedFormConstants {
            $( $(#[$doc])* pub $name: f64, )+
        }

        impl ClosedFormConstants {
            pub const EXACT: Self = Self { $( $name: $value, )+ };

            pub const NAMES: &'static [&'static str] = &[ $( stringify!($name), )+ ];

            pub fn get(&self, name: &str) -> Option<f64> {
                match name {
                    $( stringify!($name) => Some(self.$name), )+
                    _ => None,
                }
            }

            fn slot(&mut self, name: &str) -> Option<&mut f64> {
                match name {
                    $( stringify!($name) => Some(&mut self.$name), )+
                    _ => None,
                }
            }
        }
    };
}

constant_table! {
    /// `2 T V_A V_B` term of the degenerate photon number.
    deg_gain_product = 2.0,
    /// `2 T sqrt(U_A V_A U_B V_B)` interference term of the degenerate photon number.
    deg_contrast = 2.0,
    /// `2 N (1 + N)` in the degenerate variance.
    deg_variance_pair = 2.0,
    /// `R T V_A` internal-loss correction of the degenerate variance.
    deg_internal_loss = 1.0,
    /// Denominator of `(1 - eta) / (2 eta)` in the balanced detection-loss deviation.
    fig2_fano_half = 2.0,
    /// `2 U V (1 - cos phi)` in the balanced detection-loss deviation.
    fig2_gain = 2.0,
    /// `1 / (2 U_min V_min)` lossless degenerate optimum.
    deg_optimum_factor = 2.0,
    /// `1 + 8 U_B V_B` inside the loss term of the lossy optimum.
    loss_term_pair = 8.0,
    /// Leading `2 (V_B - V_t)^2` of the lossy optimal photon number.
    lossy_diff = 2.0,
    /// `4 (V_B - V_t)^2 (U_B + V_t)^2` under the square root.
    lossy_disc_diff = 4.0,
    /// `4 U_B V_B L` under the square root.
    lossy_disc_loss = 4.0,
    /// `4 R V_t [...]` cross term under the square root.
    lossy_disc_cross = 4.0,
    /// `2 U_B V_B` inside the cross term.
    lossy_cross_pair = 2.0,
    /// `2 (U_B + V_B)(U_t + V_t)` denominator of the lossy optimal photon number.
    lossy_denominator = 2.0,
    /// `4 U_B V_B (U_t - R) V_t` denominator of the lossy optimal uncertainty.
    lossy_uncertainty_denominator = 4.0,
    /// `(T_1 + T_2) V_A V_B` term of the nondegenerate port amplitude.
    nd_gain_product = 1.0,
    /// `2 sqrt(T_1 T_2 U_A U_B V_A V_B)` single-port contrast.
    nd_contrast = 2.0,
    /// `4 sqrt(T_1 T_2 U_A U_B V_A V_B)` sum-port contrast.
    nd_sum_contrast = 4.0,
    /// `N (1 + N)` single-port variance.
    nd_port_variance = 1.0,
    /// `N_+ (2 + N_+)` sum-port variance.
    nd_sum_variance_shot = 2.0,
    /// `2 T_1 T_2` in the sum-port loss correction.
    nd_sum_loss_pair = 2.0,
    /// `eta_1 eta_2 (N_1 + N_2)` cross-shot term of the detected sum variance.
    nd_sum_cross_shot = 1.0,
    /// `1 / (4 U_min V_min)` lossless nondegenerate optimum.
    nd_optimum_factor = 4.0,
    /// `(1 + eta) / (2 eta)` dark-fringe detection factor.
    dark_fringe_half = 2.0,
    /// `F = 2 U V` quantum Fisher information.
    qfi_factor = 2.0,
}

impl Default for ClosedFormConstants {
    fn default() -> Self {
        Self::EXACT
    }
}

impl ClosedFormConstants {
    /// The exact table with one coefficient multiplied by `factor`.
    pub fn perturbed(name: &str, factor: f64) -> Option<Self> {
        let mut table = Self::EXACT;
        *table.slot(name)? *= factor;
        Some(table)
    }
}

thread_local! {
    static ACTIVE: Cell<ClosedFormConstants> = const { Cell::new(ClosedFormConstants::EXACT) };
}

/// The table in effect on the calling thread.
pub fn active() -> ClosedFormConstants {
    ACTIVE.with(Cell::get)
}

/// Runs `f` with `table` installed on the calling thread, restoring the
/// previous table afterwards (also on unwind).
pub fn with_constants<R>(table: ClosedFormConstants, f: impl FnOnce() -> R) -> R {
    struct Restore(ClosedFormConstants);
    impl Drop for Restore {
        fn drop(&mut self) {
            ACTIVE.with(|cell| cell.set(self.0));
        }
    }
    let _restore = Restore(ACTIVE.with(|cell| cell.replace(table)));
    f()
}
