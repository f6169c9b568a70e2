"""Deterministic radio-sensing simulator.

Specular ray tracing between fixed transceivers, bandlimited channel impulse
responses, background subtraction and bistatic ellipse heatmaps for
occupancy detection.
"""
from radsense.channel import (CirTaps, SampledCir, assemble_cir, fresnel_reflection,
                              path_amplitude, sample_bandlimited)
from radsense.pipeline import empty_scene_heatmap, run_sensing, simulate_links
from radsense.raytrace import PropagationPath, enumerate_paths, mirror_point, occluded
from radsense.scene import (Scenario, ScenarioError, expand_geometry, load_scenario,
                            parse_scenario, reference_scene, serialize_scenario)
from radsense.sensing import (DifferentialCir, Heatmap, OccupancyReport, calibrate_threshold,
                              detect, ellipse_layer, fuse, score_lots, subtract)

__version__ = "0.1.0"
