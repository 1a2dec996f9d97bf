#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fftdock/geometry.hpp"

namespace fftdock {

struct AtomRecord {
  int serial = 0;
  std::string atom_name;
  std::string residue_name;
  char chain_id = ' ';
  int residue_seq = 0;
  Vec3 position;
  std::string element;  // empty when columns 77-78 are absent

  friend bool operator==(const AtomRecord&, const AtomRecord&) = default;
};

struct Structure {
  std::string id;
  std::vector<AtomRecord> atoms;
  std::string source_path;

  std::vector<Vec3> positions() const;
};

struct BoundingBox {
  Vec3 min_corner;
  Vec3 max_corner;

  Vec3 center() const { return 0.5 * (min_corner + max_corner); }
  double largest_edge() const;
  bool contains(const Vec3& p) const;
};

// Reads ATOM records of the first model. HETATM, TER, REMARK and every other
// record type are skipped; ENDMDL stops the read. Throws ParseError for a bad
// numeric field and NoAtomsError when nothing was read.
Structure parse_pdb(std::istream& in, std::string id);
Structure parse_pdb(std::string_view text, std::string id);

// id defaults to the file stem. Throws IoError if the file cannot be opened.
Structure read_pdb_file(const std::filesystem::path& path, std::string id = {});

// Emits one fixed-column ATOM line per atom (3-decimal coordinates) and END.
void write_pdb(std::ostream& out, const Structure& s);
std::string format_atom_line(const AtomRecord& atom);

BoundingBox bounding_box(const Structure& s);

}  // namespace fftdock
