"""Reference vehicles and fixture medians for two well-known skid-steer platforms.

The four reference deployments (Husky on tile and snow, Warthog on gravel
and ice) anchor the docs, the demo catalog, and the consistency tests. The
Husky medians are absolute anchors; the Warthog medians are derived from the
two encoded factors below. The raw logs behind these values are not
distributed with this package, so tests assert ratios between the constants
rather than recomputing them from data.
"""

from .kinematics import VehicleSpec
from .mapping import Catalog, build_catalog, default_terrain_scale, deployment_record

__all__ = [
    "HUSKY",
    "WARTHOG",
    "MEDIAN_HUSKY_TILE",
    "MEDIAN_HUSKY_SNOW",
    "ICE_OVER_SNOW_FACTOR",
    "ICE_OVER_GRAVEL_FACTOR",
    "MEDIAN_WARTHOG_ICE",
    "MEDIAN_WARTHOG_GRAVEL",
    "reference_records",
    "reference_catalog",
]

# Wheel geometry is nominal (it does not enter the kinetic-energy proxy);
# mass and v_max are the load-bearing constants.
HUSKY = VehicleSpec("husky", mass=75.0, v_max=1.0, wheel_radius=0.165, track_width=0.555)
WARTHOG = VehicleSpec("warthog", mass=470.0, v_max=5.0, wheel_radius=0.3, track_width=1.5)

MEDIAN_HUSKY_TILE = 1.716
MEDIAN_HUSKY_SNOW = 2.76

# Warthog-on-ice median relative to Husky-on-snow, and relative to
# Warthog-on-gravel (ice reads slightly easier than gravel because the
# modulus is blind to transitory motion).
ICE_OVER_SNOW_FACTOR = 3.6
ICE_OVER_GRAVEL_FACTOR = 0.95

MEDIAN_WARTHOG_ICE = ICE_OVER_SNOW_FACTOR * MEDIAN_HUSKY_SNOW
MEDIAN_WARTHOG_GRAVEL = MEDIAN_WARTHOG_ICE / ICE_OVER_GRAVEL_FACTOR


def reference_records(scale=None):
    """The four reference deployments as catalog records."""
    scale = scale or default_terrain_scale()
    return [
        deployment_record("husky_tile", HUSKY, scale.lookup("tile"), "reference", MEDIAN_HUSKY_TILE),
        deployment_record("husky_snow", HUSKY, scale.lookup("snow"), "reference", MEDIAN_HUSKY_SNOW),
        deployment_record(
            "warthog_gravel", WARTHOG, scale.lookup("gravel"), "reference", MEDIAN_WARTHOG_GRAVEL
        ),
        deployment_record("warthog_ice", WARTHOG, scale.lookup("ice"), "reference", MEDIAN_WARTHOG_ICE),
    ]


def reference_catalog() -> Catalog:
    return build_catalog(reference_records())
