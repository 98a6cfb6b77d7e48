#include "vaspflow/vasp/potcar.hpp"

#include <cstdint>
#include <cstdio>
#include <sstream>

#include "vaspflow/detail/text.hpp"
#include "vaspflow/errors.hpp"

namespace vaspflow::vasp {

namespace {

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf, 16);
}

}  // namespace

PotcarInfo parse_potcar(std::string_view text) {
  PotcarInfo info;
  info.header_hash = fnv1a_hex(text);
  for (const auto line : detail::split_lines(text)) {
    const auto toks = detail::split_ws(line);
    if (toks.size() < 2 || toks[0] != "TITEL") continue;
    // TITEL  = PAW_PBE Al 04Jan2001
    std::size_t i = 1;
    if (toks[i] == "=") ++i;
    if (i + 1 >= toks.size())
      throw Error(ErrorKind::MalformedPotcar,
                  "TITEL line lacks an element field");
    std::string symbol(toks[i + 1]);
    const auto cut = symbol.find('_');
    if (cut != std::string::npos) symbol.resize(cut);
    if (symbol.empty() || !std::isalpha(static_cast<unsigned char>(symbol[0])))
      throw Error(ErrorKind::MalformedPotcar,
                  "TITEL element field '" + symbol + "' is not a symbol");
    info.species.push_back(std::move(symbol));
  }
  if (info.species.empty())
    throw Error(ErrorKind::MalformedPotcar, "no TITEL lines found");
  return info;
}

std::string write_potcar_stub(const std::vector<std::string>& species) {
  std::ostringstream out;
  for (const auto& sp : species) {
    out << " PAW_PBE " << sp << " 01Jan2000\n";
    out << " parameters from PSCTR are:\n";
    out << "   TITEL  = PAW_PBE " << sp << " 01Jan2000\n";
    out << "End of Dataset\n";
  }
  return out.str();
}

}  // namespace vaspflow::vasp
