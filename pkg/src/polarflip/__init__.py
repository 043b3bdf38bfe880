"""Polar-code list decoding with learned bit-flip retries."""

from .channel import (add_noise, ebno_to_sigma, frame_rng, hard_error_count,
                      llr_from_channel, modulate)
from .codes import (PolarCode, build_code, code_from_frozen, crc_attach,
                    crc_check, encode, encode_message, ga_reliability,
                    load_reliability, nr_reliability, polar_transform)
from .decoders import (DecodeResult, FlipBatchResult, TrainingBatch,
                       fast_sclf_decode, flip_decode_batch, fscl_decode,
                       ideal_flip_decode_batch, rank_flip_candidates,
                       sc_decode, scl_decode, sclf_decode)
from .engine import EngineResult, ListEngine, Selection, select_output
from .harness import (SimConfig, SimResult, ThetaTrajectory, run_conditioned,
                      run_fer, run_ideal, write_results,
                      write_theta_trajectory)
from .instrument import (CostLedger, OpCounts, attempt_profile, kbits,
                         memory_model, mergesort_cost)
from .trainer import (TrainerState, bce_loss, exp_taylor, init_theta,
                      loss_gradient, score_weights, softmin)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
