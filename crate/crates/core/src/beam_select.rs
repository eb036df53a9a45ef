//! Dynamic beam codebooks over the relay candidates and exhaustive
//! max-SNR pair selection.
//!
//! Each side carries one steering beam per target: the opposite link
//! endpoint plus every candidate mount. Selection scores all pairs through
//! the rank-one channel terms, so a search over `(C+1)^2` pairs costs
//! `O(C^2)` complex products per path instead of `O(C^2 K)`.

use num_complex::Complex64;

use crate::channel::{
    inner, snr_db, steering_angle, ula_steering, ChannelRealization, LinkParams,
};
use crate::error::{Error, Result};
use crate::scenario::{RelayMount, Scenario};

/// What a beam points at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamTarget {
    /// The opposite link endpoint.
    Direct,
    /// Candidate mount by index into the candidate list.
    Relay(usize),
}

/// Paired transmit/receive steering beams, one per target. Entry 0 is
/// always the direct link.
#[derive(Debug, Clone)]
pub struct Codebooks {
    pub tx_beams: Vec<Vec<Complex64>>,
    pub rx_beams: Vec<Vec<Complex64>>,
    pub targets: Vec<BeamTarget>,
}

impl Codebooks {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

/// Builds the codebooks for one drop: beam 0 steers Tx toward Rx (and Rx
/// toward Tx), beam `i + 1` steers both toward candidate mount `i`.
pub fn build_codebooks(
    scn: &Scenario,
    candidates: &[RelayMount],
    params: &LinkParams,
) -> Result<Codebooks> {
    params.validate()?;
    let p_tx = scn.p_tx();
    let p_rx = scn.p_rx();
    let steer = |from: [f64; 3], to: [f64; 3]| -> Result<Vec<Complex64>> {
        Ok(ula_steering(
            params.antennas,
            params.antenna_spacing,
            params.wavelength,
            steering_angle(from, to)?,
        ))
    };

    let mut tx_beams = vec![steer(p_tx, p_rx)?];
    let mut rx_beams = vec![steer(p_rx, p_tx)?];
    let mut targets = vec![BeamTarget::Direct];
    for (i, mount) in candidates.iter().enumerate() {
        tx_beams.push(steer(p_tx, mount.position)?);
        rx_beams.push(steer(p_rx, mount.position)?);
        targets.push(BeamTarget::Relay(i));
    }
    Ok(Codebooks { tx_beams, rx_beams, targets })
}

/// What the winning pair points at; `Mixed` when the two sides disagree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChosenTarget {
    Direct,
    Relay(usize),
    Mixed { tx: BeamTarget, rx: BeamTarget },
}

impl std::fmt::Display for ChosenTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChosenTarget::Direct => write!(f, "direct"),
            ChosenTarget::Relay(i) => write!(f, "relay:{i}"),
            ChosenTarget::Mixed { .. } => write!(f, "mixed"),
        }
    }
}

/// Outcome of the exhaustive pair search.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BeamDecision {
    pub tx_index: usize,
    pub rx_index: usize,
    pub snr_db: f64,
    pub chosen: ChosenTarget,
}

/// Scores every beam pair against the channel and returns the maximizer;
/// exact ties go to the lowest `(tx_index, rx_index)` pair.
pub fn select_beam_pair(
    channel: &ChannelRealization,
    books: &Codebooks,
    params: &LinkParams,
) -> Result<BeamDecision> {
    if books.is_empty() {
        return Err(Error::invalid("empty codebooks".to_string()));
    }
    if books.tx_beams.len() != books.len() || books.rx_beams.len() != books.len() {
        return Err(Error::invalid("codebook sides disagree in size".to_string()));
    }
    for b in books.tx_beams.iter().chain(&books.rx_beams) {
        if b.len() != channel.antennas {
            return Err(Error::invalid(format!(
                "beam length {} does not match the {}-antenna channel",
                b.len(),
                channel.antennas
            )));
        }
    }

    // per-path projections onto every beam: w^H a_rx and a_tx^H f
    let rx_proj: Vec<Vec<Complex64>> = channel
        .paths
        .iter()
        .map(|path| {
            let a = channel.rx_steering(path.aoa);
            books.rx_beams.iter().map(|w| inner(w, &a)).collect()
        })
        .collect();
    let tx_proj: Vec<Vec<Complex64>> = channel
        .paths
        .iter()
        .map(|path| {
            let a = channel.tx_steering(path.aod);
            books.tx_beams.iter().map(|f| inner(&a, f)).collect()
        })
        .collect();

    let mut best = (0usize, 0usize, f64::NEG_INFINITY);
    for j in 0..books.len() {
        for i in 0..books.len() {
            let mut v = Complex64::new(0.0, 0.0);
            for (t, path) in channel.paths.iter().enumerate() {
                v += path.amplitude * rx_proj[t][i] * tx_proj[t][j];
            }
            let power = v.norm_sqr();
            // strict improvement keeps the earliest pair in scan order,
            // which is exactly the lexicographic (tx, rx) tie rule
            if power > best.2 {
                best = (j, i, power);
            }
        }
    }

    let (tx_index, rx_index, power) = best;
    let tx_target = books.targets[tx_index];
    let rx_target = books.targets[rx_index];
    let chosen = if tx_target == rx_target {
        match tx_target {
            BeamTarget::Direct => ChosenTarget::Direct,
            BeamTarget::Relay(r) => ChosenTarget::Relay(r),
        }
    } else {
        ChosenTarget::Mixed { tx: tx_target, rx: rx_target }
    };
    Ok(BeamDecision {
        tx_index,
        rx_index,
        snr_db: snr_db(params, power.sqrt()),
        chosen,
    })
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{composite_channel, Facing, FarFieldPolicy, GainModel, RankOnePath};
    use crate::scenario::{generate_scenario, HighwayConfig};
    use crate::SPEED_OF_LIGHT;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn test_params() -> LinkParams {
        LinkParams {
            wavelength: SPEED_OF_LIGHT / 26e9,
            antennas: 8,
            antenna_spacing: SPEED_OF_LIGHT / 26e9 / 2.0,
            tx_power_dbm: 20.0,
            noise_power_dbm: -88.0,
            blocker_loss_db: 20.0,
            element_gain: GainModel::Isotropic,
            min_hop_distance: 5.0,
            far_field: FarFieldPolicy::Strict,
        }
    }

    fn empty_road() -> Scenario {
        let cfg = HighwayConfig { traffic_density: 0.0, ..HighwayConfig::default() };
        generate_scenario(&cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap()
    }

    fn mount_at(x: f64, y: f64) -> RelayMount {
        RelayMount { vehicle: 2, position: [x, y, 0.75], facing: Facing::NegativeX }
    }

    #[test]
    fn codebook_sizes_track_the_candidate_count() {
        let scn = empty_road();
        let params = test_params();
        let none = build_codebooks(&scn, &[], &params).unwrap();
        assert_eq!(none.len(), 1);
        assert_eq!(none.targets, vec![BeamTarget::Direct]);

        let mounts = vec![mount_at(4.1, 240.0), mount_at(4.1, 250.0), mount_at(-4.1, 260.0)];
        let books = build_codebooks(&scn, &mounts, &params).unwrap();
        assert_eq!(books.len(), 4);
        assert_eq!(books.targets[3], BeamTarget::Relay(2));
        for beam in books.tx_beams.iter().chain(&books.rx_beams) {
            assert_eq!(beam.len(), 8);
            for e in beam {
                assert!((e.norm() - 1.0).abs() < 1e-12, "unit-modulus entries");
            }
        }
    }

    #[test]
    fn relay_beam_points_at_the_mount() {
        let scn = empty_road();
        let params = test_params();
        let mount = mount_at(4.1, 250.0);
        let books = build_codebooks(&scn, &[mount], &params).unwrap();
        let angle = (50.0f64 / (4.1f64.powi(2) + 50.0f64.powi(2)).sqrt()).asin();
        let expected =
            ula_steering(params.antennas, params.antenna_spacing, params.wavelength, angle);
        for (got, want) in books.tx_beams[1].iter().zip(&expected) {
            assert!((got - want).norm() < 1e-12);
        }
    }

    #[test]
    fn direct_only_selection_recovers_the_closed_form_snr() {
        let scn = empty_road();
        let params = test_params();
        let books = build_codebooks(&scn, &[], &params).unwrap();
        let alpha = 3.1e-6;
        // direct path aligned with the actual Tx-Rx geometry
        let path = RankOnePath {
            amplitude: Complex64::new(alpha, 0.0),
            aod: steering_angle(scn.p_tx(), scn.p_rx()).unwrap(),
            aoa: steering_angle(scn.p_rx(), scn.p_tx()).unwrap(),
        };
        let ch = composite_channel(&params, path, vec![]);
        let decision = select_beam_pair(&ch, &books, &params).unwrap();
        assert_eq!((decision.tx_index, decision.rx_index), (0, 0));
        assert_eq!(decision.chosen, ChosenTarget::Direct);
        let expected =
            20.0 + 88.0 + 20.0 * (64.0 * alpha).log10() - 10.0 * 8f64.log10();
        assert!((decision.snr_db - expected).abs() < 1e-9, "{}", decision.snr_db);
    }

    #[test]
    fn heavily_blocked_direct_loses_to_a_coherent_relay() {
        let scn = empty_road();
        let params = test_params();
        let mount = mount_at(4.1, 250.0);
        let books = build_codebooks(&scn, &[mount], &params).unwrap();
        // 2 blockers take the direct amplitude down 40 dB
        let direct = RankOnePath {
            amplitude: Complex64::new(9.2e-6 * 1e-2, 0.0),
            aod: steering_angle(scn.p_tx(), scn.p_rx()).unwrap(),
            aoa: steering_angle(scn.p_rx(), scn.p_tx()).unwrap(),
        };
        let relay = RankOnePath {
            amplitude: Complex64::new(4.2e-5, 0.0),
            aod: steering_angle(scn.p_tx(), mount.position).unwrap(),
            aoa: steering_angle(scn.p_rx(), mount.position).unwrap(),
        };
        let ch = composite_channel(&params, direct, vec![relay]);
        let decision = select_beam_pair(&ch, &books, &params).unwrap();
        assert_eq!((decision.tx_index, decision.rx_index), (1, 1));
        assert_eq!(decision.chosen, ChosenTarget::Relay(0));
    }

    #[test]
    fn transmit_power_scaling_never_moves_the_argmax() {
        let params = test_params();
        let scn = empty_road();
        let mounts = vec![mount_at(4.1, 245.0), mount_at(-4.1, 255.0)];
        let books = build_codebooks(&scn, &mounts, &params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let rand_path = |rng: &mut ChaCha8Rng| RankOnePath {
            amplitude: Complex64::cis(rng.gen_range(-PI..PI)) * rng.gen_range(1e-7..1e-4),
            aod: rng.gen_range(-1.5..1.5),
            aoa: rng.gen_range(-1.5..1.5),
        };
        let direct = rand_path(&mut rng);
        let bounced = vec![rand_path(&mut rng), rand_path(&mut rng)];
        let ch = composite_channel(&params, direct, bounced);

        let base = select_beam_pair(&ch, &books, &params).unwrap();
        let boosted_params = LinkParams { tx_power_dbm: 50.0, ..params };
        let boosted = select_beam_pair(&ch, &books, &boosted_params).unwrap();
        assert_eq!((base.tx_index, base.rx_index), (boosted.tx_index, boosted.rx_index));
        assert!((boosted.snr_db - base.snr_db - 30.0).abs() < 1e-12);
    }

    #[test]
    fn exact_ties_go_to_the_lexicographically_first_pair() {
        let params = test_params();
        let scn = empty_road();
        let books_single = build_codebooks(&scn, &[], &params).unwrap();
        // duplicate the direct beams under a relay label: every pair ties
        let books = Codebooks {
            tx_beams: vec![books_single.tx_beams[0].clone(), books_single.tx_beams[0].clone()],
            rx_beams: vec![books_single.rx_beams[0].clone(), books_single.rx_beams[0].clone()],
            targets: vec![BeamTarget::Direct, BeamTarget::Relay(0)],
        };
        let path = RankOnePath { amplitude: Complex64::new(1e-5, 0.0), aod: 0.3, aoa: -0.2 };
        let ch = composite_channel(&params, path, vec![]);
        let decision = select_beam_pair(&ch, &books, &params).unwrap();
        assert_eq!((decision.tx_index, decision.rx_index), (0, 0));
        assert_eq!(decision.chosen, ChosenTarget::Direct);
    }

    #[test]
    fn split_preferences_are_reported_as_mixed() {
        let params = test_params();
        let scn = empty_road();
        let mount = mount_at(4.1, 250.0);
        let books = build_codebooks(&scn, &[mount], &params).unwrap();
        // one path departing toward the Rx but arriving from the mount's
        // direction: the best pair splits across targets
        let path = RankOnePath {
            amplitude: Complex64::new(1e-5, 0.0),
            aod: steering_angle(scn.p_tx(), scn.p_rx()).unwrap(),
            aoa: steering_angle(scn.p_rx(), mount.position).unwrap(),
        };
        let ch = composite_channel(&params, path, vec![]);
        let decision = select_beam_pair(&ch, &books, &params).unwrap();
        assert_eq!((decision.tx_index, decision.rx_index), (0, 1));
        assert_eq!(
            decision.chosen,
            ChosenTarget::Mixed { tx: BeamTarget::Direct, rx: BeamTarget::Relay(0) }
        );
        assert_eq!(decision.chosen.to_string(), "mixed");
    }

    #[test]
    fn beam_length_mismatch_is_rejected() {
        let params = test_params();
        let scn = empty_road();
        let books = build_codebooks(&scn, &[], &params).unwrap();
        let narrow = LinkParams { antennas: 4, ..params };
        let path = RankOnePath { amplitude: Complex64::new(1e-5, 0.0), aod: 0.0, aoa: 0.0 };
        let ch = composite_channel(&narrow, path, vec![]);
        assert!(select_beam_pair(&ch, &books, &narrow).is_err());
    }

    proptest! {
        #[test]
        fn selection_matches_a_direct_exhaustive_rescore(seed in 0u64..150) {
            let params = test_params();
            let scn = empty_road();
            let mounts = vec![mount_at(4.1, 242.0), mount_at(-9.1, 251.0), mount_at(0.9, 258.0)];
            let books = build_codebooks(&scn, &mounts, &params).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rand_path = |rng: &mut ChaCha8Rng| RankOnePath {
                amplitude: Complex64::cis(rng.gen_range(-PI..PI)) * rng.gen_range(1e-7..1e-4),
                aod: rng.gen_range(-1.5..1.5),
                aoa: rng.gen_range(-1.5..1.5),
            };
            let direct = rand_path(&mut rng);
            let bounced = vec![rand_path(&mut rng), rand_path(&mut rng), rand_path(&mut rng)];
            let ch = composite_channel(&params, direct, bounced);
            let decision = select_beam_pair(&ch, &books, &params).unwrap();

            // independent rescore straight through the bilinear form
            let mut best = f64::NEG_INFINITY;
            let mut best_pair = (0, 0);
            for j in 0..books.len() {
                for i in 0..books.len() {
                    let v = ch.bilinear(&books.rx_beams[i], &books.tx_beams[j]).norm_sqr();
                    if v > best * (1.0 + 1e-12) {
                        best = v;
                        best_pair = (j, i);
                    }
                }
            }
            prop_assert_eq!((decision.tx_index, decision.rx_index), best_pair);
            // the direct pair never beats the winner
            let direct_power =
                ch.bilinear(&books.rx_beams[0], &books.tx_beams[0]).norm_sqr();
            prop_assert!(best >= direct_power * (1.0 - 1e-12));
        }
    }
}
