"""RIS-assisted LEO downlink joint communication/positioning simulator."""

from .channel import (ChannelRealization, LargeScaleParams, LinkBudget,
                      RISConfig, RISSpec, array_response, direct_gain, fspl_db,
                      gamma_d, gamma_r, link_budget, reflected_channel, ru_gain,
                      snr, sr_gain)
from .codebook import (Codebook, Codeword, Family, PhaseSet, build_codebook,
                       comm_codeword, default_anchors, pos_codeword,
                       quantize_phase)
from .controller import (EvalContext, ModePolicy, OperatingMode, Selection,
                         UtilityRefs, continuous_upper_bound, evaluate_codeword,
                         robust_evaluate, select_alpha, select_comm_only,
                         select_joint_nominal, select_pos_only, select_robust,
                         utility)
from .errors import (DegenerateGeometry, InvalidConfig, InvalidInput,
                     NoFeasibleCodeword, ParseError, SimError, SingularFim,
                     ValidationError, ZeroSnr)
from .geometry import (SPEED_OF_LIGHT, PathDelays, ScenarioGeometry, UserPos2D,
                       Vec3, delay_jacobian, distances, embed_user, path_delays)
from .positioning import (DelayVarParams, ReducedCov, delay_variances, fim, peb)
from .shadowing import (KalmanParams, ShadowFieldParams, ShadowTracker, ar1_rho,
                        evolve_shadow, kf_step, shadow_measurement, spatial_cov,
                        worst_case_shadow)

__version__ = "0.1.0"
