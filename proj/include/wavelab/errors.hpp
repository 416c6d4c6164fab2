#pragma once

#include <stdexcept>
#include <string>

namespace wavelab {

/// Base class for all recoverable failures raised by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Derivative of a homogeneous symbol requested at (or too close to) xi = 0.
struct ZeroFrequency : Error {
    explicit ZeroFrequency(const std::string& what) : Error(what) {}
};

/// Derivative order exceeds what finite differences can deliver reliably.
struct OrderExceeded : Error {
    explicit OrderExceeded(const std::string& what) : Error(what) {}
};

/// Brownian path step count is not a positive power of two.
struct InvalidSteps : Error {
    explicit InvalidSteps(const std::string& what) : Error(what) {}
};

/// Coarsening factor does not evenly divide the path, or is not a power of two.
struct InvalidFactor : Error {
    explicit InvalidFactor(const std::string& what) : Error(what) {}
};

/// A bicharacteristic left the safety ball |x| + |xi| <= 1e12.
struct BlowUp : Error {
    explicit BlowUp(const std::string& what) : Error(what) {}
};

/// Requested grid size exceeds the direct-quantization budget.
struct GridTooLarge : Error {
    explicit GridTooLarge(const std::string& what) : Error(what) {}
};

/// SPDE step failed the stability guard (CFL heuristic or norm growth).
struct Instability : Error {
    explicit Instability(const std::string& what) : Error(what) {}
};

/// A directional spectral band contains no Fourier modes at all.
struct EmptyBand : Error {
    explicit EmptyBand(const std::string& what) : Error(what) {}
};

/// Scenario file is malformed: unknown key, missing field, bad value.
struct BadScenario : Error {
    explicit BadScenario(const std::string& what) : Error(what) {}
};

} // namespace wavelab
