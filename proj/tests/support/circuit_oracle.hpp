#pragma once

// State-vector interpretation of circuit IR for logic checks.

#include <complex>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "dhisq/dqcc.hpp"
#include "oracles.hpp"

namespace oracle {

/// Runs the IR on `sv`, forcing the k-th measurement to outcomes[k]. Returns
/// the probability of that outcome sequence. Throws std::runtime_error on
/// gates the oracle does not model.
double interpret(const dhisq::dqcc::CircuitIR& ir, StateVector& sv, const std::vector<int>& outcomes,
                 std::map<std::string, int>& bits);

std::size_t measurement_count(const dhisq::dqcc::CircuitIR& ir);

std::vector<std::complex<double>> random_state(std::mt19937& rng, int qubits);

/// Places a 2-qubit state on (q0, q_{n-1}) of an n-qubit register, the rest |0>.
std::vector<std::complex<double>> embed(const std::vector<std::complex<double>>& two, int n);

}  // namespace oracle
