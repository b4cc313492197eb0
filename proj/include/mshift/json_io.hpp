#pragma once

#include <string>

#include "mshift/solution.hpp"
#include "mshift/types.hpp"

namespace mshift {

// Instance <-> JSON. Serialization is canonical (sorted keys, two-space
// indent, shortest round-trip doubles) so identical instances produce
// byte-identical files. Parsing rejects malformed input with a ParseError
// that names the offending JSON path.
std::string instance_to_json(const Instance& inst);
Instance instance_from_json(const std::string& text);

Instance load_instance(const std::string& path);
void save_instance(const Instance& inst, const std::string& path);

// Solution <-> JSON, same canonical form. Node and request references are
// public ids, so a solution file stays meaningful next to its instance file.
std::string solution_to_json(const Solution& sol);
Solution solution_from_json(const std::string& text);

} // namespace mshift
