"""Independent reference computations used to freeze expected values in the C++ tests."""
import math

R_E = 6371.0e3
GM = 398600.4418e9
C = 299792458.0


def slant_range_law_of_sines(h, mask):
    r = R_E + h
    nadir = math.asin(R_E * math.cos(mask) / r)
    central = math.pi / 2 - mask - nadir
    return math.sqrt(R_E**2 + r**2 - 2 * R_E * r * math.cos(central))


def gold_lfsr(c_init, length, nc=1600):
    # plain shift registers, no precomputed recurrence arrays
    x1 = [1] + [0] * 30
    x2 = [(c_init >> i) & 1 for i in range(31)]
    out = []
    for n in range(nc + length):
        if n >= nc:
            out.append(x1[0] ^ x2[0])
        f1 = x1[3] ^ x1[0]
        f2 = x2[3] ^ x2[2] ^ x2[1] ^ x2[0]
        x1 = x1[1:] + [f1]
        x2 = x2[1:] + [f2]
    return out


if __name__ == "__main__":
    h = 554e3
    print("rho_max(0)", math.sqrt((R_E + h) ** 2 - R_E**2))
    print("rho_max(30deg)", slant_range_law_of_sines(h, math.radians(30)))
    v = math.sqrt(GM / (R_E + h))
    print("vis-viva speed", v)
    print("doppler bound", 2.2e9 / C * v)
    L = (C / (4 * math.pi * 2.2e9 * 554e3)) ** 2
    print("L dB", 10 * math.log10(L), "oracle", -20 * math.log10(4 * math.pi * 554e3 * 2.2e9 / C))
    print("nu", -(2.2e9 / C) * -6985.0)
    print("gold c_init=1 first 8", gold_lfsr(1, 8))
    print("gold c_init=0 first 16", gold_lfsr(0, 16))
    print("gold c_init=0x5a5a5a first 32", gold_lfsr(0x5A5A5A, 32))
    b = gold_lfsr(12345, 10000)
    print("balance 12345", sum(b) / len(b))
