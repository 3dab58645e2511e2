import math

SPEED_OF_LIGHT = 2.998e8  # m/s
WR90_BROAD_WALL = 0.02286  # m
TWO_PI = 2.0 * math.pi
DEFAULT_CENTER_FREQUENCY = TWO_PI * 8.4e9  # rad/s


def mhz(value):
    """Ordinary frequency in MHz -> angular frequency in rad/s."""
    return TWO_PI * value * 1e6


def ghz(value):
    """Ordinary frequency in GHz -> angular frequency in rad/s."""
    return TWO_PI * value * 1e9
