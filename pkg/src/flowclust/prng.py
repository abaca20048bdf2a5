"""Fixed 64-bit pseudo-random generator for reproducible data generation.

Every sampled artifact in this package must be bit-reproducible from a seed,
on any platform and any library version. numpy's Generator does not promise
stable streams across releases, so the generators here use SplitMix64, a
splittable 64-bit generator with published constants:

    state <- (state + 0x9E3779B97F4A7C15) mod 2^64
    z <- state
    z <- (z XOR z >> 30) * 0xBF58476D1CE4E5B9 mod 2^64
    z <- (z XOR z >> 27) * 0x94D049BB133111EB mod 2^64
    output z XOR z >> 31

Doubles in [0, 1) take the top 53 bits: (output >> 11) * 2**-53.

Normal deviates use the Marsaglia polar method with a fixed consumption
order: draw u = 2U1 - 1, v = 2U2 - 1, retry while s = u^2 + v^2 is not in
(0, 1), then emit u*f and v*f with f = sqrt(-2 ln s / s). Pairs are drawn as
needed, in order; when a call needs an odd count the second member of the
last pair is discarded, never cached for a later call.
"""

import math

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """SplitMix64 stream. Seeds are taken modulo 2^64."""

    def __init__(self, seed):
        self._state = int(seed) & MASK64

    def next_uint64(self):
        self._state = (self._state + _GAMMA) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & MASK64
        return z ^ (z >> 31)

    def uniform(self):
        """One double in [0, 1), top 53 bits of the next output."""
        return (self.next_uint64() >> 11) * 2.0**-53

    def uniforms(self, n):
        import numpy as np

        out = np.empty(int(n), dtype=np.float64)
        for i in range(int(n)):
            out[i] = self.uniform()
        return out

    def normal_pair(self):
        """Two independent standard normals (Marsaglia polar method)."""
        while True:
            u = 2.0 * self.uniform() - 1.0
            v = 2.0 * self.uniform() - 1.0
            s = u * u + v * v
            if 0.0 < s < 1.0:
                f = math.sqrt(-2.0 * math.log(s) / s)
                return u * f, v * f

    def normals(self, n):
        import numpy as np

        n = int(n)
        out = np.empty(n, dtype=np.float64)
        i = 0
        while i < n:
            a, b = self.normal_pair()
            out[i] = a
            i += 1
            if i < n:
                out[i] = b
                i += 1
        return out

    def index_below(self, n):
        """Unbiased integer in [0, n) by rejection on the top range."""
        n = int(n)
        if n <= 0:
            raise ValueError("index_below needs n >= 1")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_uint64()
            if x < limit:
                return x % n

    def spawn(self):
        """Child generator seeded from this stream (splittable use)."""
        return SplitMix64(self.next_uint64())
