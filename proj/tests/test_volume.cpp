#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "support.hpp"

using namespace vgc;

TEST(Normalize, AffineMinMax) {
  Volume v(Dims{3, 1, 1}, std::vector<float>{2, 4, 6});
  const auto n = normalize_intensity(v);
  EXPECT_EQ(n.vector(), (std::vector<float>{0.0f, 0.5f, 1.0f}));
}

TEST(Normalize, ConstantMapsToZero) {
  Volume v(Dims{4, 3, 2}, 0.7f);
  const auto n = normalize_intensity(v);
  for (float x : n.values()) EXPECT_EQ(x, 0.0f);
}

TEST(Normalize, AlreadyNormalizedUnchanged) {
  Volume v(Dims{4, 1, 1}, std::vector<float>{0.0f, 0.25f, 1.0f, 0.5f});
  EXPECT_EQ(normalize_intensity(v), v);
}

TEST(Normalize, Idempotent) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    auto v = test::random_volume(rng, test::random_dims(rng, 1, 6));
    v[0] = 5.0f;  // keep it non-constant
    const auto once = normalize_intensity(v);
    EXPECT_EQ(normalize_intensity(once), once);
  }
}

TEST(Threshold, Definition) {
  Volume v(Dims{3, 1, 1}, std::vector<float>{0.2f, 0.5f, 0.7f});
  EXPECT_EQ(threshold_volume(v, 0.5).vector(), (std::vector<float>{0.0f, 0.5f, 0.7f}));
}

TEST(Threshold, IdempotentAndZero) {
  std::mt19937_64 rng(2);
  const auto v = test::random_volume(rng, {5, 4, 3});
  const auto once = threshold_volume(v, 0.4);
  EXPECT_EQ(threshold_volume(once, 0.4), once);
  Volume z(Dims{3, 3, 3}, 0.0f);
  EXPECT_EQ(threshold_volume(z, 0.3), z);
}

TEST(Threshold, RejectsOutOfRange) {
  Volume v(Dims{2, 2, 2}, 0.5f);
  EXPECT_THROW(threshold_volume(v, 0.0), ParameterError);
  EXPECT_THROW(threshold_volume(v, 1.5), ParameterError);
  EXPECT_NO_THROW(threshold_volume(v, 1.0));
}

TEST(VolumeIO, RoundTripF32AndU8) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    const auto v = test::random_volume(rng, test::random_dims(rng, 1, 9));
    const auto p = test::temp_path("rt.vgr");
    write_volume(v, p);
    EXPECT_EQ(read_volume(p), v);
    const auto b = binarize(v, 0.5);
    write_grid(b, p);
    EXPECT_EQ(read_grid<std::uint8_t>(p), b);
  }
}

TEST(VolumeIO, WrongMagic) {
  const auto p = test::temp_path("bad_magic.vgr");
  std::ofstream(p, std::ios::binary) << "XXXX0000000000000000";
  EXPECT_THROW(read_volume(p), FormatError);
}

TEST(VolumeIO, TruncatedPayloadNamesOffset) {
  const Volume v(kDefaultDims, 0.25f);
  auto bytes = encode_grid(v);
  bytes.resize(bytes.size() / 2);
  const auto p = test::temp_path("short.vgr");
  std::ofstream(p, std::ios::binary).write(bytes.data(), std::streamsize(bytes.size()));
  try {
    read_volume(p);
    FAIL() << "expected a format error";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos) << e.what();
  }
}

TEST(VolumeIO, DimOverflowRejected) {
  detail::ByteWriter w;
  w.bytes("VGR1");
  w.u32(3);
  w.u32(1u << 20);
  w.u32(1u << 20);
  w.u32(1u << 20);
  w.u8(1);
  w.u8(0);
  const auto p = test::temp_path("overflow.vgr");
  w.save(p);
  EXPECT_THROW(read_volume(p), FormatError);
}

TEST(Synth, Deterministic) {
  const auto a = synth_generate(ClassLabel::SAL, Domain::healthy(), Variant::Full, 42);
  const auto b = synth_generate(ClassLabel::SAL, Domain::healthy(), Variant::Full, 42);
  EXPECT_EQ(a.volume, b.volume);
  const auto c = synth_generate(ClassLabel::SAL, Domain::healthy(), Variant::Full, 43);
  EXPECT_NE(a.volume, c.volume);
}

TEST(Synth, ValuesInUnitInterval) {
  for (int c = 0; c < kNumClasses; ++c) {
    const auto s = synth_generate(class_from_index(c), Domain::unhealthy(make_lesion(c)),
                                  Variant::Full, std::uint64_t(c));
    for (float x : s.volume.values()) {
      ASSERT_GE(x, 0.0f);
      ASSERT_LE(x, 1.0f);
    }
    EXPECT_EQ(s.volume.dims(), kDefaultDims);
  }
}

TEST(Synth, LesionInteriorIsZeroWithoutNoise) {
  GeneratorOptions opt;
  opt.noise_sigma = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Lesion l = make_lesion(seed);
    const auto s = synth_generate(ClassLabel::DMN, Domain::unhealthy(l), Variant::Full, seed, opt);
    const Dims d = s.volume.dims();
    int inside = 0;
    for (std::uint32_t z = 0; z < d.z; ++z)
      for (std::uint32_t y = 0; y < d.y; ++y)
        for (std::uint32_t x = 0; x < d.x; ++x)
          if (l.contains(x, y, z)) {
            ++inside;
            ASSERT_EQ(s.volume(x, y, z), 0.0f);
          }
    EXPECT_GT(inside, 0);
  }
}

TEST(Synth, ThresholdedVariantValues) {
  const auto s = synth_generate(ClassLabel::LANG, Domain::healthy(), Variant::Thresholded, 5);
  for (float x : s.volume.values()) {
    EXPECT_TRUE(x == 0.0f || x >= kThresholdedVariantCutoff);
  }
}

TEST(Synth, ClassSeparationOverHundredSamples) {
  // Mean intensity at the class's own canonical centers beats the mean at
  // every other class's centers.
  auto mean_at = [](const Volume& v, ClassLabel c) {
    double s = 0.0;
    const auto centers = canonical_centers(c);
    for (const auto& b : centers) {
      const auto p = center_voxel(b, v.dims());
      s += v(p[0], p[1], p[2]);
    }
    return s / double(centers.size());
  };
  int separated = 0;
  for (int i = 0; i < 100; ++i) {
    const auto c = class_from_index(i % kNumClasses);
    const auto s = synth_generate(c, Domain::healthy(), Variant::Full, 1000 + i);
    const double own = mean_at(s.volume, c);
    bool ok = true;
    for (int o = 0; o < kNumClasses; ++o) {
      if (o != i % kNumClasses && mean_at(s.volume, class_from_index(o)) >= own) ok = false;
    }
    separated += ok;
  }
  EXPECT_GE(separated, 95);
}

TEST(Synth, CentersInsideUnitCube) {
  for (int c = 0; c < kNumClasses; ++c) {
    const auto centers = canonical_centers(class_from_index(c));
    EXPECT_GE(centers.size(), 2u);
    EXPECT_LE(centers.size(), 3u);
    for (const auto& b : centers) {
      for (double u : {b.x, b.y, b.z}) {
        EXPECT_GE(u, 0.0);
        EXPECT_LE(u, 1.0);
      }
    }
  }
}

TEST(Synth, ShippedGeometryFileMatchesTable) {
  const auto shipped = read_json_file(std::filesystem::path(VGC_SOURCE_DIR) / "configs/synth_v1.json");
  EXPECT_EQ(shipped, synth_geometry_json());
}

TEST(Dataset, Counting) {
  DatasetOptions o;
  o.n_per_class_per_domain = 5;
  o.generator.dims = {12, 12, 10};
  const auto ds = make_dataset(o);
  ASSERT_EQ(ds.size(), 70u);
  int counts[2][kNumClasses] = {};
  for (const auto& s : ds) ++counts[s.domain.is_healthy() ? 0 : 1][int(s.label)];
  for (auto& dom : counts)
    for (int n : dom) EXPECT_EQ(n, 5);
}

TEST(Dataset, HealthyOnlyEightyOne) {
  DatasetOptions o;
  o.n_per_class_per_domain = 81;
  o.unhealthy = false;
  o.generator.dims = {4, 4, 4};
  EXPECT_EQ(make_dataset(o).size(), 567u);
}

TEST(Dataset, SameSeedSameSequence) {
  DatasetOptions o;
  o.n_per_class_per_domain = 2;
  o.seed = 9;
  o.generator.dims = {10, 10, 8};
  const auto a = make_dataset(o);
  const auto b = make_dataset(o);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].seed, b[i].seed);
    EXPECT_EQ(a[i].volume, b[i].volume);
    EXPECT_EQ(a[i].domain, b[i].domain);
  }
}

TEST(Dataset, SeedCounterScheme) {
  DatasetOptions o;
  o.n_per_class_per_domain = 3;
  o.seed = 100;
  o.healthy = false;
  o.generator.dims = {6, 6, 6};
  const auto ds = make_dataset(o);
  // unhealthy domain = 1, class 2, replicate 1
  EXPECT_EQ(ds[2 * 3 + 1].seed, splitmix64(100 + (1 * 7 + 2) * 3 + 1));
}

TEST(Manifest, RoundTrip) {
  std::vector<ManifestRecord> recs = {
      {"a.vgr", ClassLabel::VAN, Domain::Kind::Unhealthy, Variant::Thresholded, 77},
      {"b.vgr", ClassLabel::DMN, Domain::Kind::Healthy, Variant::Full, 1}};
  const auto p = test::temp_path("manifest.jsonl");
  write_manifest(recs, p);
  auto back = read_manifest(p);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(std::filesystem::path(back[i].path).filename(), recs[i].path);
    back[i].path = recs[i].path;
    EXPECT_EQ(back[i], recs[i]);
  }
}
