"""Traveling-wave computation, tail classification and the implicit pushed criterion."""
from .profile import WaveProfile
from .shooting import minimal_wave, scalar_min_speed, scalar_wave_shoot
