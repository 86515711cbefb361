from .auxiliary import aux_features, blur_edge, delta_feature, gradient_energies, mad, mad_features, tl_blur, tl_sai
from .dlm import decouple, dlm_features, dlm_scale, mask, masked_restore
from .info import fit_gsm_channel, info_features, srred, strred, trred, vif_a, vif_hv
from .ssim import cs_map, luminance_map, ms_essim, ms_ssim, pool, scale_stats, ssim_family

__all__ = [
    "aux_features", "blur_edge", "delta_feature", "gradient_energies", "mad", "mad_features", "tl_blur",
    "tl_sai", "decouple", "dlm_features", "dlm_scale", "mask", "masked_restore", "fit_gsm_channel",
    "info_features", "srred", "strred", "trred", "vif_a", "vif_hv", "cs_map", "luminance_map",
    "ms_essim", "ms_ssim", "pool", "scale_stats", "ssim_family",
]
