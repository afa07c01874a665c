#include "dhisq/dqcc.hpp"
#include "dhisq/error.hpp"

namespace dhisq::dqcc {

std::map<std::string, std::uint32_t> default_codewords() {
  return {{"h", 1},  {"x", 2},  {"y", 3},   {"z", 4},   {"s", 5},       {"sdg", 6}, {"t", 7},
          {"tdg", 8}, {"sx", 9}, {"id", 10}, {"cx", 16}, {"cz", 17}, {"measure", 32}};
}

MappingConfig one_per_controller(const CircuitIR& ir, int first_id) {
  MappingConfig m;
  int id = first_id;
  for (const auto& q : ir.qubits) m.qubits[q] = QubitPorts{id++, 0, 1, 2};
  m.codewords = default_codewords();
  return m;
}

const QubitPorts& MappingConfig::ports(const std::string& qubit) const {
  auto it = qubits.find(qubit);
  if (it == qubits.end()) throw Error(ErrorKind::kCompile, "qubit '" + qubit + "' is not mapped");
  return it->second;
}

std::uint32_t MappingConfig::codeword(const std::string& gate, const std::vector<std::string>& qs) const {
  std::string key = gate + "@";
  for (std::size_t i = 0; i < qs.size(); ++i) key += (i ? "," : "") + qs[i];
  if (auto it = overrides.find(key); it != overrides.end()) return it->second;
  if (auto it = codewords.find(gate); it != codewords.end()) return it->second;
  throw Error(ErrorKind::kCompile, "no codeword for '" + key + "'");
}

}  // namespace dhisq::dqcc
