#include "vaspflow/vasp/poscar.hpp"

#include <cctype>
#include <sstream>

#include "vaspflow/detail/text.hpp"
#include "vaspflow/errors.hpp"

namespace vaspflow::vasp {

namespace {

using detail::split_lines;
using detail::split_ws;
using detail::to_double;
using detail::to_int;
using detail::trim;

constexpr int kMaxAtoms = 1000000;

bool is_symbol_token(std::string_view tok) {
  if (tok.empty() || !std::isalpha(static_cast<unsigned char>(tok.front())))
    return false;
  for (char c : tok)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

bool parse_flag(std::string_view tok, bool& out) {
  if (tok.empty()) return false;
  const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(tok.front())));
  if (c == 'T') { out = true; return true; }
  if (c == 'F') { out = false; return true; }
  return false;
}

}  // namespace

CrystalStructure parse_poscar(std::string_view text) {
  const auto lines = split_lines(text);
  std::size_t ln = 0;
  auto next_line = [&](ErrorKind kind, const char* what) -> std::string_view {
    if (ln >= lines.size())
      throw Error(kind, std::string("unexpected end of file, expected ") + what);
    return lines[ln++];
  };

  CrystalStructure s;
  s.comment = std::string(trim(next_line(ErrorKind::MalformedLattice, "comment line")));

  const auto scale_toks = split_ws(next_line(ErrorKind::MalformedScale, "scale line"));
  if (scale_toks.size() != 1)
    throw Error(ErrorKind::MalformedScale, "scale line must hold exactly one number");
  const auto scale = to_double(scale_toks[0]);
  if (!scale || !(*scale > 0.0) || !std::isfinite(*scale))
    throw Error(ErrorKind::MalformedScale, "scale must be a positive number");
  s.scale = *scale;

  for (int r = 0; r < 3; ++r) {
    const auto toks = split_ws(next_line(ErrorKind::MalformedLattice, "lattice row"));
    if (toks.size() != 3)
      throw Error(ErrorKind::MalformedLattice,
                  "lattice row " + std::to_string(r + 1) + " needs 3 numbers");
    for (int c = 0; c < 3; ++c) {
      const auto v = to_double(toks[c]);
      if (!v)
        throw Error(ErrorKind::MalformedLattice,
                    "non-numeric lattice entry '" + std::string(toks[c]) + "'");
      s.lattice(r, c) = *v;
    }
  }

  const auto species_toks = split_ws(next_line(ErrorKind::MalformedSpecies, "species line"));
  if (species_toks.empty())
    throw Error(ErrorKind::MalformedSpecies, "species line is empty");
  for (const auto tok : species_toks) {
    if (!is_symbol_token(tok)) {
      if (to_double(tok))
        throw Error(ErrorKind::MalformedSpecies,
                    "species symbols line missing (VASP-4 layout); "
                    "VASP-5 files with explicit symbols are required");
      throw Error(ErrorKind::MalformedSpecies,
                  "invalid species symbol '" + std::string(tok) + "'");
    }
    s.species.emplace_back(tok);
  }

  const auto count_toks = split_ws(next_line(ErrorKind::CountMismatch, "counts line"));
  if (count_toks.size() != s.species.size())
    throw Error(ErrorKind::CountMismatch,
                "counts line does not match the species line");
  long long total = 0;
  for (const auto tok : count_toks) {
    const auto v = to_int(tok);
    if (!v || *v <= 0)
      throw Error(ErrorKind::CountMismatch,
                  "invalid species count '" + std::string(tok) + "'");
    total += *v;
    if (total > kMaxAtoms)
      throw Error(ErrorKind::CountMismatch, "atom count exceeds supported size");
    s.counts.push_back(static_cast<int>(*v));
  }
  const int n = static_cast<int>(total);

  std::string_view mode_line = next_line(ErrorKind::UnknownCoordinateMode, "coordinate mode");
  {
    const auto t = trim(mode_line);
    if (!t.empty() && (t.front() == 'S' || t.front() == 's')) {
      s.selective_dynamics = true;
      mode_line = next_line(ErrorKind::UnknownCoordinateMode, "coordinate mode");
    }
  }
  const auto mode_tok = trim(mode_line);
  if (mode_tok.empty())
    throw Error(ErrorKind::UnknownCoordinateMode, "coordinate mode line is empty");
  switch (mode_tok.front()) {
    case 'D': case 'd':
      s.mode = CoordinateMode::Direct;
      break;
    case 'C': case 'c': case 'K': case 'k':
      s.mode = CoordinateMode::Cartesian;
      break;
    default:
      throw Error(ErrorKind::UnknownCoordinateMode,
                  "unrecognized coordinate mode '" + std::string(mode_tok) + "'");
  }

  s.positions.resize(3, n);
  if (s.selective_dynamics) s.move_flags.resize(3, n);
  for (int i = 0; i < n; ++i) {
    const auto toks = split_ws(next_line(ErrorKind::CountMismatch, "coordinate row"));
    const std::size_t need = s.selective_dynamics ? 6 : 3;
    if (toks.size() < need)
      throw Error(toks.size() < 3 ? ErrorKind::MalformedCoordinates
                                  : ErrorKind::CountMismatch,
                  "coordinate row " + std::to_string(i + 1) + " is too short");
    for (int c = 0; c < 3; ++c) {
      const auto v = to_double(toks[c]);
      if (!v)
        throw Error(ErrorKind::MalformedCoordinates,
                    "non-numeric coordinate '" + std::string(toks[c]) + "'");
      s.positions(c, i) = *v;
    }
    if (s.selective_dynamics) {
      for (int c = 0; c < 3; ++c) {
        bool flag = true;
        if (!parse_flag(toks[3 + c], flag))
          throw Error(ErrorKind::MalformedCoordinates,
                      "invalid selective dynamics flag '" +
                          std::string(toks[3 + c]) + "'");
        s.move_flags(c, i) = flag;
      }
    }
  }

  validate(s);
  return s;
}

std::string write_poscar(const CrystalStructure& s) {
  validate(s);
  std::ostringstream out;
  out << s.comment << '\n';
  out << "   " << detail::format_shortest(s.scale) << '\n';
  auto num = [](double v) {
    std::string t = detail::format_fixed16(v);
    if (t.size() < 22) t.insert(0, 22 - t.size(), ' ');
    return t;
  };
  for (int r = 0; r < 3; ++r)
    out << num(s.lattice(r, 0)) << num(s.lattice(r, 1)) << num(s.lattice(r, 2))
        << '\n';
  for (std::size_t b = 0; b < s.species.size(); ++b)
    out << (b ? " " : "  ") << s.species[b];
  out << '\n';
  for (std::size_t b = 0; b < s.counts.size(); ++b)
    out << (b ? " " : "  ") << s.counts[b];
  out << '\n';
  if (s.selective_dynamics) out << "Selective dynamics\n";
  out << (s.mode == CoordinateMode::Direct ? "Direct" : "Cartesian") << '\n';
  for (Eigen::Index i = 0; i < s.positions.cols(); ++i) {
    out << num(s.positions(0, i)) << num(s.positions(1, i))
        << num(s.positions(2, i));
    if (s.selective_dynamics)
      for (int c = 0; c < 3; ++c) out << (s.move_flags(c, i) ? "   T" : "   F");
    out << '\n';
  }
  return out.str();
}

}  // namespace vaspflow::vasp
