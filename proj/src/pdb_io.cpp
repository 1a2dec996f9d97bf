#include "fftdock/pdb_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "fftdock/errors.hpp"

namespace fftdock {

namespace {

// 1-based inclusive column range, clipped to the line; surrounding blanks
// removed.
std::string_view column(std::string_view line, std::size_t first, std::size_t last) {
  if (line.size() < first) return {};
  std::string_view f = line.substr(first - 1, last - first + 1);
  while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
  while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.remove_suffix(1);
  return f;
}

int read_int_field(std::string_view field, const char* name, std::size_t line_no) {
  if (field.empty()) return 0;
  int value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw ParseError(std::string("bad ") + name + " field '" + std::string(field) + "'", line_no);
  return value;
}

double read_coordinate(std::string_view field, const char* name, std::size_t line_no) {
  if (field.empty()) throw ParseError(std::string("missing ") + name + " coordinate", line_no);
  double value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value))
    throw ParseError(std::string("bad ") + name + " coordinate '" + std::string(field) + "'", line_no);
  return value;
}

bool record_is(std::string_view line, std::string_view name) {
  if (line.substr(0, name.size()) != name) return false;
  // the rest of the 6-column record name must be blank
  for (std::size_t i = name.size(); i < std::min<std::size_t>(6, line.size()); ++i)
    if (line[i] != ' ') return false;
  return true;
}

}  // namespace

std::vector<Vec3> Structure::positions() const {
  std::vector<Vec3> out;
  out.reserve(atoms.size());
  for (const AtomRecord& a : atoms) out.push_back(a.position);
  return out;
}

double BoundingBox::largest_edge() const {
  const Vec3 e = max_corner - min_corner;
  return std::max({e.x, e.y, e.z});
}

bool BoundingBox::contains(const Vec3& p) const {
  return p.x >= min_corner.x && p.y >= min_corner.y && p.z >= min_corner.z && p.x <= max_corner.x &&
         p.y <= max_corner.y && p.z <= max_corner.z;
}

Structure parse_pdb(std::istream& in, std::string id) {
  Structure s;
  s.id = std::move(id);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (record_is(line, "ENDMDL")) break;
    if (!record_is(line, "ATOM")) continue;

    AtomRecord a;
    a.serial = read_int_field(column(line, 7, 11), "serial", line_no);
    if (a.serial < 0) throw ParseError("negative serial", line_no);
    a.atom_name = column(line, 13, 16);
    a.residue_name = column(line, 18, 20);
    a.chain_id = line.size() >= 22 ? line[21] : ' ';
    a.residue_seq = read_int_field(column(line, 23, 26), "resSeq", line_no);
    a.position.x = read_coordinate(column(line, 31, 38), "x", line_no);
    a.position.y = read_coordinate(column(line, 39, 46), "y", line_no);
    a.position.z = read_coordinate(column(line, 47, 54), "z", line_no);
    a.element = column(line, 77, 78);
    s.atoms.push_back(std::move(a));
  }
  if (s.atoms.empty()) throw NoAtomsError(s.id.empty() ? std::string("structure") : s.id);
  return s;
}

Structure parse_pdb(std::string_view text, std::string id) {
  std::istringstream in{std::string(text)};
  return parse_pdb(in, std::move(id));
}

Structure read_pdb_file(const std::filesystem::path& path, std::string id) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  if (id.empty()) id = path.stem().string();
  Structure s = parse_pdb(in, std::move(id));
  s.source_path = path.string();
  return s;
}

std::string format_atom_line(const AtomRecord& a) {
  // Names shorter than four characters start in column 14.
  std::string name = a.atom_name.size() < 4 ? " " + a.atom_name : a.atom_name;
  char buf[96];
  std::snprintf(buf, sizeof buf, "ATOM  %5d %-4.4s %3.3s %c%4d    %8.3f%8.3f%8.3f%6.2f%6.2f          %2.2s",
                a.serial % 100000, name.c_str(), a.residue_name.c_str(), a.chain_id, a.residue_seq % 10000,
                a.position.x, a.position.y, a.position.z, 1.0, 0.0, a.element.c_str());
  return buf;
}

void write_pdb(std::ostream& out, const Structure& s) {
  for (const AtomRecord& a : s.atoms) out << format_atom_line(a) << '\n';
  out << "END\n";
}

BoundingBox bounding_box(const Structure& s) {
  if (s.atoms.empty()) throw NoAtomsError(s.id.empty() ? std::string("structure") : s.id);
  constexpr double inf = std::numeric_limits<double>::infinity();
  BoundingBox b{{inf, inf, inf}, {-inf, -inf, -inf}};
  for (const AtomRecord& a : s.atoms) {
    b.min_corner = {std::min(b.min_corner.x, a.position.x), std::min(b.min_corner.y, a.position.y),
                    std::min(b.min_corner.z, a.position.z)};
    b.max_corner = {std::max(b.max_corner.x, a.position.x), std::max(b.max_corner.y, a.position.y),
                    std::max(b.max_corner.z, a.position.z)};
  }
  return b;
}

}  // namespace fftdock
