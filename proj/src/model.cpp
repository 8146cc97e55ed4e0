#include "kerrqsd/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace kerrqsd {

void ModelParams::validate() const {
  auto finite = [](double v, const char* name) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be finite");
  };
  finite(detuning, "detuning");
  finite(drive, "drive");
  finite(chi, "chi");
  finite(kappa, "kappa");
  if (kappa <= 0.0) throw std::invalid_argument("kappa must be > 0, got " + std::to_string(kappa));
  if (chi < 0.0) throw std::invalid_argument("chi must be >= 0, got " + std::to_string(chi));
}

Operator hamiltonian(const ModelParams& params, FockDim dim) {
  params.validate();
  const Index d = dim.value();
  CMatrix h = CMatrix::Zero(d, d);
  for (Index n = 0; n < d; ++n) {
    const double nn = static_cast<double>(n);
    h(n, n) = params.detuning * nn + params.chi * nn * nn;
    if (n + 1 < d) {
      const double coupling = params.drive * std::sqrt(nn + 1.0);
      h(n, n + 1) = coupling;
      h(n + 1, n) = coupling;
    }
  }
  return Operator(std::move(h));
}

Operator lindblad(const ModelParams& params, FockDim dim) {
  params.validate();
  return Complex(std::sqrt(params.kappa), 0.0) * annihilation(dim);
}

}  // namespace kerrqsd
