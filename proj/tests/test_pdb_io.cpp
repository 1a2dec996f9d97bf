#include <doctest.h>

#include <random>
#include <sstream>

#include "fftdock/errors.hpp"
#include "fftdock/pdb_io.hpp"
#include "fixtures.hpp"

using namespace fftdock;

TEST_CASE("fixed-column ATOM record") {
  const Structure s =
      parse_pdb("ATOM      1  N   MET A   1      10.000  20.000  30.000  1.00  0.00           N\n", "x");
  REQUIRE(s.atoms.size() == 1);
  const AtomRecord& a = s.atoms[0];
  CHECK(a.serial == 1);
  CHECK(a.atom_name == "N");
  CHECK(a.residue_name == "MET");
  CHECK(a.chain_id == 'A');
  CHECK(a.residue_seq == 1);
  CHECK(a.position == Vec3{10.0, 20.0, 30.0});
  CHECK(a.element == "N");
  CHECK(s.id == "x");
}

TEST_CASE("only ATOM records count") {
  const std::string text =
      "REMARK   1 nothing here\n"
      "HETATM    1  O   HOH A 101       1.000   2.000   3.000  1.00  0.00           O\n";
  CHECK_THROWS_AS(parse_pdb(text, "w"), NoAtomsError);
  CHECK_THROWS_AS(parse_pdb(std::string_view{}, "empty"), NoAtomsError);
}

TEST_CASE("bad coordinate reports the line number") {
  const std::string text =
      "REMARK first\n"
      "ATOM      1  CA  GLY A   1       1.000   2.000   3.000  1.00  0.00           C\n"
      "ATOM      2  CA  GLY A   2         abc   2.000   3.000  1.00  0.00           C\n";
  try {
    parse_pdb(text, "bad");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("first model only and short lines") {
  const std::string text =
      "MODEL        1\n"
      "ATOM      1  CA  GLY A   1       1.000   2.000   3.000\n"
      "ENDMDL\n"
      "MODEL        2\n"
      "ATOM      1  CA  GLY A   1       9.000   9.000   9.000\n";
  const Structure s = parse_pdb(text, "m");
  REQUIRE(s.atoms.size() == 1);
  CHECK(s.atoms[0].position == Vec3{1, 2, 3});
  CHECK(s.atoms[0].element.empty());
}

TEST_CASE("write then read reproduces the atoms") {
  const Structure blob = fixtures::random_blob(5, 50, 20.0, "blob");
  const Structure back = parse_pdb(fixtures::pdb_text(blob), "blob");
  REQUIRE(back.atoms.size() == blob.atoms.size());
  for (std::size_t i = 0; i < blob.atoms.size(); ++i) {
    CHECK(back.atoms[i].serial == blob.atoms[i].serial);
    CHECK((back.atoms[i].position - blob.atoms[i].position).norm() < 1e-3);
  }
}

TEST_CASE("file reading") {
  const auto dir = fixtures::scratch_dir("pdb");
  fixtures::write_structure(dir / "thing.pdb", fixtures::make_structure("t", {{1, 2, 3}}));
  const Structure s = read_pdb_file(dir / "thing.pdb");
  CHECK(s.id == "thing");
  CHECK(s.atoms.size() == 1);
  try {
    read_pdb_file(dir / "missing.pdb");
    FAIL("expected an io error");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("missing.pdb") != std::string::npos);
  }
}

TEST_CASE("bounding box") {
  const BoundingBox one = bounding_box(fixtures::make_structure("a", {{1, 2, 3}}));
  CHECK(one.min_corner == Vec3{1, 2, 3});
  CHECK(one.max_corner == Vec3{1, 2, 3});
  const BoundingBox two = bounding_box(fixtures::make_structure("b", {{0, 0, 0}, {-1, 5, 2}}));
  CHECK(two.min_corner == Vec3{-1, 0, 0});
  CHECK(two.max_corner == Vec3{0, 5, 2});
  CHECK_THROWS_AS(bounding_box(Structure{}), NoAtomsError);

  const Structure blob = fixtures::random_blob(9, 100, 30.0, "c");
  double lo[3] = {1e300, 1e300, 1e300}, hi[3] = {-1e300, -1e300, -1e300};
  for (const AtomRecord& a : blob.atoms) {
    const double c[3] = {a.position.x, a.position.y, a.position.z};
    for (int i = 0; i < 3; ++i) {
      if (c[i] < lo[i]) lo[i] = c[i];
      if (c[i] > hi[i]) hi[i] = c[i];
    }
  }
  const BoundingBox box = bounding_box(blob);
  CHECK(box.min_corner == Vec3{lo[0], lo[1], lo[2]});
  CHECK(box.max_corner == Vec3{hi[0], hi[1], hi[2]});
}
