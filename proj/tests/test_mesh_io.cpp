#include "test_util.hpp"

namespace shapeval {
namespace {

TEST(MeshIo, MinimalOff) {
  const auto m = parse_mesh("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2", MeshFormat::Off);
  ASSERT_EQ(m.triangles.size(), 1u);
  EXPECT_EQ(m.vertices.size(), 3u);
  EXPECT_EQ(m.triangles[0], (std::array<std::uint32_t, 3>{0, 1, 2}));
}

TEST(MeshIo, OffWithCommentsAndInlineCounts) {
  const auto m = parse_mesh("# cube corner\nOFF 3 1 0\n0 0 0 # origin\n1e0 0 0\n0 +1 0\n\n3 0 1 2\n", MeshFormat::Off);
  EXPECT_EQ(m.triangles.size(), 1u);
  EXPECT_EQ(m.vertices[2], (Vec3{0, 1, 0}));
}

TEST(MeshIo, OffRejections) {
  EXPECT_SHAPEVAL_ERROR(parse_mesh("OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n4 0 1 3 2\n", MeshFormat::Off),
                        ErrorCode::NonTriangleFace);
  EXPECT_SHAPEVAL_ERROR(parse_mesh("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 3\n", MeshFormat::Off),
                        ErrorCode::IndexOutOfRange);
  EXPECT_SHAPEVAL_ERROR(parse_mesh("OFF\n3 1 0\n0 0 0\n1 nan 0\n0 1 0\n3 0 1 2\n", MeshFormat::Off),
                        ErrorCode::ParseError);
  EXPECT_SHAPEVAL_ERROR(parse_mesh("OFF\n3 1 0\n0 0 0\n1 inf 0\n0 1 0\n3 0 1 2\n", MeshFormat::Off),
                        ErrorCode::ParseError);
  EXPECT_SHAPEVAL_ERROR(parse_mesh("PLY\n", MeshFormat::Off), ErrorCode::ParseError);
  EXPECT_SHAPEVAL_ERROR(parse_mesh("OFF\n3 2 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n", MeshFormat::Off),
                        ErrorCode::ParseError);
}

TEST(MeshIo, ParseErrorReportsLine) {
  try {
    parse_mesh("OFF\n3 1 0\n0 0 0\n1 x 0\n0 1 0\n3 0 1 2\n", MeshFormat::Off);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
}

TEST(MeshIo, ObjTriangles) {
  const auto m = parse_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 2 3\nf 1 3 4\n", MeshFormat::Obj);
  EXPECT_EQ(m.vertices.size(), 4u);
  ASSERT_EQ(m.triangles.size(), 2u);
  EXPECT_EQ(m.triangles[1], (std::array<std::uint32_t, 3>{0, 2, 3}));
}

TEST(MeshIo, ObjRejectsQuad) {
  EXPECT_SHAPEVAL_ERROR(parse_mesh("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n", MeshFormat::Obj),
                        ErrorCode::NonTriangleFace);
}

TEST(MeshIo, ObjIndicesAreOneBased) {
  EXPECT_SHAPEVAL_ERROR(parse_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n", MeshFormat::Obj),
                        ErrorCode::IndexOutOfRange);
  EXPECT_SHAPEVAL_ERROR(parse_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n", MeshFormat::Obj),
                        ErrorCode::IndexOutOfRange);
}

TEST(MeshIo, ObjRejectsOtherRecords) {
  EXPECT_SHAPEVAL_ERROR(parse_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1 2 3\n", MeshFormat::Obj),
                        ErrorCode::ParseError);
  EXPECT_SHAPEVAL_ERROR(parse_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1 2/2 3/3\n", MeshFormat::Obj),
                        ErrorCode::ParseError);
}

TEST(MeshIo, DropsDegenerateTriangles) {
  const auto m = parse_mesh("OFF\n4 3 0\n0 0 0\n1 0 0\n2 0 0\n0 1 0\n3 0 1 2\n3 0 0 3\n3 0 1 3\n", MeshFormat::Off);
  EXPECT_EQ(m.triangles.size(), 1u);
  EXPECT_EQ(m.dropped_degenerate, 2u);
}

TEST(MeshIo, EmptyMeshAllowed) {
  const auto m = parse_mesh("OFF\n0 0 0\n", MeshFormat::Off);
  EXPECT_TRUE(m.empty());
}

TEST(MeshIo, ReadIsPure) {
  testing::TempDir dir;
  const auto path = dir.write("cube.off", testing::off_text(testing::unit_cube()));
  const auto a = read_mesh(path), b = read_mesh(path);
  EXPECT_EQ(a.vertices, b.vertices);
  EXPECT_EQ(a.triangles, b.triangles);
  EXPECT_EQ(a.triangles.size(), 12u);
}

TEST(MeshIo, SniffsFormatWithoutExtension) {
  testing::TempDir dir;
  const auto off = dir.write("mesh.dat", "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  EXPECT_EQ(read_mesh(off).triangles.size(), 1u);
  const auto obj = dir.write("mesh2.dat", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
  EXPECT_EQ(read_mesh(obj).triangles.size(), 1u);
}

}  // namespace
}  // namespace shapeval
