#include "vaspflow/vasp/kpoints.hpp"

#include <sstream>

#include "vaspflow/detail/text.hpp"
#include "vaspflow/errors.hpp"

namespace vaspflow::vasp {

namespace {

using detail::format_shortest;
using detail::split_lines;
using detail::split_ws;
using detail::to_double;
using detail::to_int;
using detail::trim;

constexpr int kMaxMesh = 1000;

}  // namespace

KpointsSpec parse_kpoints(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.size() < 3)
    throw Error(ErrorKind::UnsupportedMode, "file needs at least 3 lines");

  KpointsSpec spec;
  spec.comment = std::string(trim(lines[0]));

  const auto count_toks = split_ws(lines[1]);
  const auto declared =
      count_toks.empty() ? std::nullopt : to_int(count_toks[0]);
  if (!declared || *declared < 0)
    throw Error(ErrorKind::UnsupportedMode,
                "line 2 must be a non-negative k-point count");

  const auto mode_tok = trim(lines[2]);
  if (mode_tok.empty())
    throw Error(ErrorKind::UnsupportedMode, "mode line is empty");
  switch (mode_tok.front()) {
    case 'G': case 'g': spec.mode = KpointsMode::GammaCentered; break;
    case 'M': case 'm': spec.mode = KpointsMode::MonkhorstPack; break;
    case 'L': case 'l': spec.mode = KpointsMode::ExplicitLine; break;
    default:
      throw Error(ErrorKind::UnsupportedMode,
                  "unrecognized mode '" + std::string(mode_tok) + "'");
  }

  if (spec.mode != KpointsMode::ExplicitLine) {
    if (*declared != 0)
      throw Error(ErrorKind::UnsupportedMode,
                  "explicit k-point lists are not supported");
    if (lines.size() < 4)
      throw Error(ErrorKind::MalformedMesh, "missing mesh line");
    const auto mesh_toks = split_ws(lines[3]);
    if (mesh_toks.size() < 3)
      throw Error(ErrorKind::MalformedMesh, "mesh line needs 3 integers");
    for (int i = 0; i < 3; ++i) {
      const auto v = to_int(mesh_toks[i]);
      if (!v || *v < 1 || *v > kMaxMesh)
        throw Error(ErrorKind::MalformedMesh,
                    "invalid mesh entry '" + std::string(mesh_toks[i]) + "'");
      spec.mesh(i) = static_cast<int>(*v);
    }
    if (lines.size() >= 5 && !trim(lines[4]).empty()) {
      const auto shift_toks = split_ws(lines[4]);
      if (shift_toks.size() < 3)
        throw Error(ErrorKind::MalformedMesh, "shift line needs 3 numbers");
      for (int i = 0; i < 3; ++i) {
        const auto v = to_double(shift_toks[i]);
        if (!v)
          throw Error(ErrorKind::MalformedMesh,
                      "invalid shift entry '" + std::string(shift_toks[i]) + "'");
        spec.shift(i) = *v;
      }
    }
    return spec;
  }

  if (*declared < 1)
    throw Error(ErrorKind::MalformedPath,
                "line mode needs a positive per-segment division count");
  spec.line_divisions = static_cast<int>(*declared);
  if (lines.size() < 4)
    throw Error(ErrorKind::MalformedPath, "missing path coordinate mode line");
  const auto coord_tok = trim(lines[3]);
  if (!coord_tok.empty() &&
      (coord_tok.front() == 'C' || coord_tok.front() == 'c' ||
       coord_tok.front() == 'K' || coord_tok.front() == 'k'))
    spec.path_cartesian = true;

  for (std::size_t ln = 4; ln < lines.size(); ++ln) {
    const auto line = lines[ln];
    std::string_view body = line;
    std::string label;
    const auto bang = line.find('!');
    if (bang != std::string_view::npos) {
      body = line.substr(0, bang);
      label = std::string(trim(line.substr(bang + 1)));
    }
    const auto toks = split_ws(body);
    if (toks.empty()) continue;
    if (toks.size() < 3)
      throw Error(ErrorKind::MalformedPath,
                  "path point on line " + std::to_string(ln + 1) +
                      " needs 3 coordinates");
    LabeledKpoint pt;
    for (int i = 0; i < 3; ++i) {
      const auto v = to_double(toks[i]);
      if (!v)
        throw Error(ErrorKind::MalformedPath,
                    "invalid path coordinate '" + std::string(toks[i]) + "'");
      pt.coords(i) = *v;
    }
    if (label.empty() && toks.size() > 3) label = std::string(toks[3]);
    pt.label = std::move(label);
    spec.line_path.push_back(std::move(pt));
  }
  if (spec.line_path.size() < 2)
    throw Error(ErrorKind::MalformedPath,
                "line mode requires at least 2 labeled points");
  return spec;
}

std::string write_kpoints(const KpointsSpec& spec) {
  std::ostringstream out;
  out << spec.comment << '\n';
  if (spec.mode != KpointsMode::ExplicitLine) {
    out << "0\n";
    out << (spec.mode == KpointsMode::GammaCentered ? "Gamma"
                                                    : "Monkhorst-Pack")
        << '\n';
    out << spec.mesh(0) << ' ' << spec.mesh(1) << ' ' << spec.mesh(2) << '\n';
    out << format_shortest(spec.shift(0)) << ' '
        << format_shortest(spec.shift(1)) << ' '
        << format_shortest(spec.shift(2)) << '\n';
    return out.str();
  }
  out << spec.line_divisions << '\n';
  out << "Line-mode\n";
  out << (spec.path_cartesian ? "Cartesian" : "Reciprocal") << '\n';
  for (std::size_t i = 0; i < spec.line_path.size(); ++i) {
    const auto& pt = spec.line_path[i];
    out << format_shortest(pt.coords(0)) << ' ' << format_shortest(pt.coords(1))
        << ' ' << format_shortest(pt.coords(2));
    if (!pt.label.empty()) out << " ! " << pt.label;
    out << '\n';
    if (i % 2 == 1 && i + 1 < spec.line_path.size()) out << '\n';
  }
  return out.str();
}

}  // namespace vaspflow::vasp
