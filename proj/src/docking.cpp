#include "fftdock/docking.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <optional>
#include <thread>

#include "fftdock/correlate.hpp"
#include "fftdock/errors.hpp"
#include "fftdock/io_util.hpp"

namespace fftdock {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Adds the elapsed time of a scope to one bucket when profiling is on.
class BucketTimer {
 public:
  BucketTimer(double* bucket) : bucket_(bucket), start_(bucket ? Clock::now() : Clock::time_point{}) {}
  ~BucketTimer() {
    if (bucket_) *bucket_ += seconds_since(start_);
  }
  BucketTimer(const BucketTimer&) = delete;
  BucketTimer& operator=(const BucketTimer&) = delete;

 private:
  double* bucket_;
  Clock::time_point start_;
};

double* bucket(TimeBreakdown* prof, double TimeBreakdown::*member) { return prof ? &(prof->*member) : nullptr; }

void best_translations(std::span<const double> scores, int n, int rotation_index, PoseHeap& out) {
  std::size_t i = 0;
  for (int tz = 0; tz < n; ++tz)
    for (int ty = 0; ty < n; ++ty)
      for (int tx = 0; tx < n; ++tx, ++i) {
        const Pose p{rotation_index, {tx, ty, tz}, quantize_score(scores[i])};
        if (out.would_accept(p)) out.push(p);
      }
}

DockingResult dock_impl(const Structure& receptor, const Structure& ligand, const DockConfig& config, int threads,
                        TimeBreakdown* prof) {
  config.validate();
  const auto t0 = Clock::now();
  if (receptor.atoms.empty()) throw NoAtomsError(receptor.id.empty() ? std::string("receptor") : receptor.id);
  if (ligand.atoms.empty()) throw NoAtomsError(ligand.id.empty() ? std::string("ligand") : ligand.id);

  GridSpec spec;
  RotationSet rotations;
  {
    BucketTimer t(bucket(prof, &TimeBreakdown::other));
    spec = choose_grid_size(receptor, ligand, config.pitch, config.margin_voxels);
    rotations = generate_rotations(config.angular_step);
  }
  DockGrid rgrid;
  {
    BucketTimer t(bucket(prof, &TimeBreakdown::voxelize));
    rgrid = assign_grid(receptor, spec, GridRole::receptor, config.params);
  }
  Fft3d fft(spec.n);
  std::optional<ReceptorSpectrum> spectrum;
  {
    BucketTimer t(bucket(prof, &TimeBreakdown::transform));
    spectrum.emplace(rgrid, fft);
  }
  rgrid.voxels = {};

  const std::vector<Vec3> ligand_pos = ligand.positions();
  std::vector<int> serials;
  for (const AtomRecord& a : ligand.atoms) serials.push_back(a.serial);
  const Vec3 ligand_center = bounding_box(ligand).center();
  const Vec3 destination = spec.center();
  const std::size_t per_rotation = static_cast<std::size_t>(std::min(config.poses_per_rotation, config.top_k));

  PoseHeap global(static_cast<std::size_t>(config.top_k));
  std::exception_ptr error;
  long error_rotation = -1;
  const long rotation_count = static_cast<long>(rotations.size());

#pragma omp parallel num_threads(threads)
  {
    Correlator corr(*spectrum, fft);
    std::vector<Vec3> placed(ligand_pos.size());
    std::vector<double> scores(spec.voxel_count());
    PoseHeap local(static_cast<std::size_t>(config.top_k));

#pragma omp for schedule(dynamic)
    for (long r = 0; r < rotation_count; ++r) {
      try {
        {
          BucketTimer t(bucket(prof, &TimeBreakdown::rotate));
          rotate_positions(ligand_pos, rotations[r], ligand_center, destination, placed);
        }
        {
          BucketTimer t(bucket(prof, &TimeBreakdown::voxelize));
          assign_grid_into(placed, serials, spec, GridRole::ligand, config.params, corr.ligand_voxels());
        }
        {
          BucketTimer t(bucket(prof, &TimeBreakdown::transform));
          corr.transform_and_multiply();
          corr.inverse(scores);
        }
        {
          BucketTimer t(bucket(prof, &TimeBreakdown::reduce));
          PoseHeap rot(per_rotation);
          best_translations(scores, spec.n, static_cast<int>(r), rot);
          for (const Pose& p : rot.sorted()) local.push(p);
        }
      } catch (...) {
        // keep the error of the lowest rotation so failures are reproducible
#pragma omp critical(fftdock_dock_error)
        if (error_rotation < 0 || r < error_rotation) {
          error = std::current_exception();
          error_rotation = r;
        }
      }
    }
#pragma omp critical(fftdock_dock_merge)
    global.merge(local);
  }
  if (error) std::rethrow_exception(error);

  DockingResult result;
  result.receptor_id = receptor.id;
  result.ligand_id = ligand.id;
  result.grid_spec = spec;
  result.params = config.params;
  result.angular_step = config.angular_step;
  result.rotation_count = static_cast<int>(rotations.size());
  {
    BucketTimer t(bucket(prof, &TimeBreakdown::reduce));
    result.top_poses = global.sorted();
  }
  if (!result.top_poses.empty()) result.best_score = result.top_poses.front().score;
  result.wall_time = seconds_since(t0);
  return result;
}

}  // namespace

void DockConfig::validate() const {
  if (!(pitch > 0) || !std::isfinite(pitch)) throw ParameterError("pitch must be positive");
  if (margin_voxels < 0) throw ParameterError("margin must be >= 0");
  if (!(angular_step > 0) || angular_step > 120 || !std::isfinite(angular_step))
    throw ParameterError("angular step must be in (0, 120]");
  const double per_turn = 360.0 / angular_step;
  if (std::abs(per_turn - std::round(per_turn)) > 1e-9) throw ParameterError("angular step must divide 360");
  if (top_k < 1) throw ParameterError("top_k must be >= 1");
  if (poses_per_rotation < 1) throw ParameterError("poses per rotation must be >= 1");
  if (threads < 0) throw ParameterError("threads must be >= 0");
  params.validate();
}

int DockConfig::resolved_threads() const {
  if (threads > 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

bool DockingResult::same_outcome(const DockingResult& o) const {
  return task_id == o.task_id && receptor_id == o.receptor_id && ligand_id == o.ligand_id &&
         grid_spec == o.grid_spec && params == o.params && angular_step == o.angular_step &&
         rotation_count == o.rotation_count && top_poses == o.top_poses && best_score == o.best_score;
}

double quantize_score(double raw) { return std::round(raw * 1e6) / 1e6 + 0.0; }

DockingResult dock_pair(const Structure& receptor, const Structure& ligand, const DockConfig& config) {
  return dock_impl(receptor, ligand, config, config.resolved_threads(), nullptr);
}

TimeBreakdown profile_dock(const Structure& receptor, const Structure& ligand, const DockConfig& config,
                           DockingResult* result) {
  TimeBreakdown prof;
  const auto t0 = Clock::now();
  DockingResult r = dock_impl(receptor, ligand, config, 1, &prof);
  prof.total = seconds_since(t0);
  const double tracked = prof.transform + prof.voxelize + prof.rotate + prof.reduce + prof.other;
  prof.other += std::max(0.0, prof.total - tracked);
  if (result) *result = std::move(r);
  return prof;
}

Structure posed_ligand(const Structure& ligand, const DockingResult& result, const Pose& pose,
                       const RotationSet& rotations) {
  if (pose.rotation_index < 0 || static_cast<std::size_t>(pose.rotation_index) >= rotations.size())
    throw ParameterError("pose rotation index out of range");
  const GridSpec& spec = result.grid_spec;
  auto signed_shift = [n = spec.n](int t) { return t > n / 2 ? t - n : t; };
  const Vec3 shift{spec.pitch * signed_shift(pose.translation[0]), spec.pitch * signed_shift(pose.translation[1]),
                   spec.pitch * signed_shift(pose.translation[2])};
  const Vec3 center = bounding_box(ligand).center();
  const Mat3 m = rotations[pose.rotation_index].matrix();
  Structure out = ligand;
  for (AtomRecord& a : out.atoms) a.position = fftdock::apply(m, a.position - center) + spec.center() - shift;
  return out;
}

std::string tsv_header() { return "task_id\treceptor_id\tligand_id\tn\tbest_score\twall_time"; }

std::string to_tsv_line(const DockingResult& r) {
  char nums[96];
  std::snprintf(nums, sizeof nums, "%d\t%.6f\t%.3f", r.grid_spec.n, r.best_score, r.wall_time);
  return r.task_id + '\t' + r.receptor_id + '\t' + r.ligand_id + '\t' + nums;
}

void to_json(nlohmann::json& j, const GridSpec& s) {
  j = {{"n", s.n}, {"pitch", s.pitch}, {"origin", {s.origin.x, s.origin.y, s.origin.z}}};
}

void from_json(const nlohmann::json& j, GridSpec& s) {
  j.at("n").get_to(s.n);
  j.at("pitch").get_to(s.pitch);
  const auto& o = j.at("origin");
  s.origin = {o.at(0).get<double>(), o.at(1).get<double>(), o.at(2).get<double>()};
}

void to_json(nlohmann::json& j, const ScoringParams& p) {
  j = {{"surface_weight", p.surface_weight},
       {"receptor_core_weight", p.receptor_core_weight},
       {"ligand_weight", p.ligand_weight},
       {"atom_radius", p.atom_radius},
       {"surface_thickness", p.surface_thickness}};
}

void from_json(const nlohmann::json& j, ScoringParams& p) {
  const ScoringParams d;
  p.surface_weight = j.value("surface_weight", d.surface_weight);
  p.receptor_core_weight = j.value("receptor_core_weight", d.receptor_core_weight);
  p.ligand_weight = j.value("ligand_weight", d.ligand_weight);
  p.atom_radius = j.value("atom_radius", d.atom_radius);
  p.surface_thickness = j.value("surface_thickness", d.surface_thickness);
}

void to_json(nlohmann::json& j, const DockConfig& c) {
  j = {{"pitch", c.pitch},
       {"margin_voxels", c.margin_voxels},
       {"angular_step", c.angular_step},
       {"top_k", c.top_k},
       {"poses_per_rotation", c.poses_per_rotation},
       {"scoring", c.params},
       {"threads", c.threads}};
}

void from_json(const nlohmann::json& j, DockConfig& c) {
  const DockConfig d;
  c.pitch = j.value("pitch", d.pitch);
  c.margin_voxels = j.value("margin_voxels", d.margin_voxels);
  c.angular_step = j.value("angular_step", d.angular_step);
  c.top_k = j.value("top_k", d.top_k);
  c.poses_per_rotation = j.value("poses_per_rotation", d.poses_per_rotation);
  c.params = j.contains("scoring") ? j.at("scoring").get<ScoringParams>() : d.params;
  c.threads = j.value("threads", d.threads);
}

void to_json(nlohmann::json& j, const Pose& p) {
  j = {{"rotation_index", p.rotation_index}, {"translation", p.translation}, {"score", p.score}};
}

void from_json(const nlohmann::json& j, Pose& p) {
  j.at("rotation_index").get_to(p.rotation_index);
  j.at("translation").get_to(p.translation);
  j.at("score").get_to(p.score);
}

void to_json(nlohmann::json& j, const DockingResult& r) {
  j = {{"task_id", r.task_id},
       {"receptor_id", r.receptor_id},
       {"ligand_id", r.ligand_id},
       {"grid", r.grid_spec},
       {"scoring", r.params},
       {"rotations", {{"angular_step", r.angular_step}, {"count", r.rotation_count}}},
       {"best_score", r.best_score},
       {"top_poses", r.top_poses},
       {"wall_time", r.wall_time}};
}

void from_json(const nlohmann::json& j, DockingResult& r) {
  j.at("task_id").get_to(r.task_id);
  j.at("receptor_id").get_to(r.receptor_id);
  j.at("ligand_id").get_to(r.ligand_id);
  j.at("grid").get_to(r.grid_spec);
  j.at("scoring").get_to(r.params);
  j.at("rotations").at("angular_step").get_to(r.angular_step);
  j.at("rotations").at("count").get_to(r.rotation_count);
  j.at("best_score").get_to(r.best_score);
  j.at("top_poses").get_to(r.top_poses);
  j.at("wall_time").get_to(r.wall_time);
}

DockConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
    DockConfig c = j.get<DockConfig>();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError("bad config " + path + ": " + e.what());
  }
}

void save_config(const std::string& path, const DockConfig& config) {
  write_file_atomic(path, nlohmann::json(config).dump(2) + "\n");
}

}  // namespace fftdock
