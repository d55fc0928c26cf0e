#include "mbfuse/fusion_eval.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include "mbfuse/error.hpp"
#include "mbfuse/imputation.hpp"
#include "mbfuse/ingest_io.hpp"

namespace mbfuse {

FusedScores fuse_simple_sum(const ScoreTable& table, bool skip_missing) {
  if (!in_unit_range(table)) throw Error(ErrorKind::NotNormalized, "fusion expects scores normalized to [0, 1]");
  FusedScores out;
  out.provenance = skip_missing && table.missing_count() > 0 ? "available_only" : "complete";
  out.rows.reserve(table.size());
  for (const auto& r : table.rows()) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& s : r.scores) {
      if (s) {
        sum += *s;
        ++count;
      } else if (!skip_missing) {
        throw Error(ErrorKind::IncompleteWithSkipDisabled, "row (" + r.probe_id + ", " + r.gallery_id + ")");
      }
    }
    if (count == 0) throw Error(ErrorKind::RowWithNoScores, "row (" + r.probe_id + ", " + r.gallery_id + ")");
    out.rows.push_back(FusedRow{r.probe_id, r.gallery_id, r.label, sum / static_cast<double>(count)});
  }
  return out;
}

RocCurve roc(const FusedScores& fused) {
  std::vector<std::pair<double, bool>> scored;  // (score, genuine)
  scored.reserve(fused.rows.size());
  RocCurve curve;
  for (const auto& r : fused.rows) {
    const bool genuine = r.label == Label::Genuine;
    scored.emplace_back(r.score, genuine);
    (genuine ? curve.genuine : curve.impostor) += 1;
  }
  if (curve.genuine == 0 || curve.impostor == 0) {
    throw Error(ErrorKind::OneClassOnly, std::to_string(curve.genuine) + " genuine, " +
                                             std::to_string(curve.impostor) + " impostor rows");
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  const double ng = static_cast<double>(curve.genuine);
  const double ni = static_cast<double>(curve.impostor);
  curve.points.push_back(RocPoint{scored.front().first + 1.0, 0.0, 0.0});
  // Integer counts keep the trapezoid sum exact.
  double tp = 0.0, fp = 0.0, area2 = 0.0;
  for (std::size_t i = 0; i < scored.size();) {
    const double t = scored[i].first;
    const double tp_prev = tp, fp_prev = fp;
    for (; i < scored.size() && scored[i].first == t; ++i) (scored[i].second ? tp : fp) += 1.0;
    area2 += (fp - fp_prev) * (tp + tp_prev);
    curve.points.push_back(RocPoint{t, fp / ni, tp / ng});
  }
  curve.points.push_back(RocPoint{scored.back().first - 1.0, 1.0, 1.0});
  curve.auc = area2 / (2.0 * ng * ni);

  // fpr - (1 - tpr) rises from -1 to +1 along the curve; interpolate the
  // first segment that reaches zero.
  const auto& pts = curve.points;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double d = pts[i].fpr - (1.0 - pts[i].tpr);
    if (d < 0.0) continue;
    const double d_prev = pts[i - 1].fpr - (1.0 - pts[i - 1].tpr);
    const double t = d == d_prev ? 0.0 : -d_prev / (d - d_prev);
    curve.eer_fpr = pts[i - 1].fpr + t * (pts[i].fpr - pts[i - 1].fpr);
    curve.eer_tpr = pts[i - 1].tpr + t * (pts[i].tpr - pts[i - 1].tpr);
    curve.eer = (curve.eer_fpr + (1.0 - curve.eer_tpr)) / 2.0;
    break;
  }
  return curve;
}

double tpr_at_fpr(const RocCurve& curve, double target) {
  double best = 0.0;
  for (const auto& p : curve.points) {
    if (p.fpr <= target) best = std::max(best, p.tpr);
  }
  return best;
}

CmcCurve cmc(const FusedScores& fused, std::size_t max_rank) {
  if (max_rank == 0) throw Error(ErrorKind::InvalidSpec, "max rank must be positive");
  struct Probe {
    std::string id;
    std::vector<double> impostor;
    std::size_t mates = 0;
    double genuine = 0.0;
  };
  std::vector<Probe> probes;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& r : fused.rows) {
    auto [it, inserted] = index.try_emplace(r.probe_id, probes.size());
    if (inserted) probes.push_back(Probe{r.probe_id, {}, 0, 0.0});
    Probe& p = probes[it->second];
    if (r.label == Label::Genuine) {
      ++p.mates;
      p.genuine = r.score;
    } else {
      p.impostor.push_back(r.score);
    }
  }
  if (probes.empty()) throw Error(ErrorKind::ProbeWithoutMate, "no probes to rank");

  std::vector<std::size_t> hits(max_rank, 0);
  for (const auto& p : probes) {
    if (p.mates == 0) throw Error(ErrorKind::ProbeWithoutMate, "probe '" + p.id + "'");
    if (p.mates > 1) throw Error(ErrorKind::ProbeWithMultipleMates, "probe '" + p.id + "'");
    const std::size_t ahead = static_cast<std::size_t>(
        std::count_if(p.impostor.begin(), p.impostor.end(), [&](double s) { return s >= p.genuine; }));
    for (std::size_t k = ahead; k < max_rank; ++k) ++hits[k];
  }
  CmcCurve curve;
  curve.probes = probes.size();
  for (std::size_t h : hits) curve.accuracy.push_back(static_cast<double>(h) / static_cast<double>(probes.size()));
  return curve;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write '" + path.string() + "'");
  return out;
}

void close_csv(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for '" + path.string() + "'");
}

}  // namespace

void write_roc_csv(const RocCurve& curve, const std::filesystem::path& path) {
  std::ofstream out = open_csv(path);
  out << "threshold,fpr,tpr\n";
  for (const auto& p : curve.points) {
    out << format_score(p.threshold) << ',' << format_score(p.fpr) << ',' << format_score(p.tpr) << '\n';
  }
  close_csv(out, path);
}

void write_cmc_csv(const CmcCurve& curve, const std::filesystem::path& path) {
  std::ofstream out = open_csv(path);
  out << "rank,accuracy\n";
  for (std::size_t k = 0; k < curve.accuracy.size(); ++k) out << k + 1 << ',' << format_score(curve.accuracy[k]) << '\n';
  close_csv(out, path);
}

void write_fused_csv(const FusedScores& fused, const std::filesystem::path& path) {
  std::ofstream out = open_csv(path);
  out << "probe_id,gallery_id,label,score\n";
  for (const auto& r : fused.rows) {
    out << r.probe_id << ',' << r.gallery_id << ',' << (r.label == Label::Genuine ? "genuine" : "impostor") << ','
        << format_score(r.score) << '\n';
  }
  close_csv(out, path);
}

FusedScores read_fused_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open '" + path.string() + "'");
  std::string line;
  std::size_t lineno = 1;
  auto strip = [](std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  };
  if (!std::getline(in, line) || (strip(line), line != "probe_id,gallery_id,label,score")) {
    throw Error(ErrorKind::MalformedLine, path.string() + ":1 expected header 'probe_id,gallery_id,label,score'");
  }
  FusedScores fused;
  fused.provenance = "file";
  while (std::getline(in, line)) {
    ++lineno;
    strip(line);
    if (line.empty()) continue;
    auto f = split_fields(line);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (f.size() != 4) throw Error(ErrorKind::MalformedLine, where);
    Label label;
    if (f[2] == "genuine") {
      label = Label::Genuine;
    } else if (f[2] == "impostor") {
      label = Label::Impostor;
    } else {
      throw Error(ErrorKind::MalformedLine, where + " label '" + std::string(f[2]) + "'");
    }
    auto score = parse_score(f[3]);
    if (!score) throw Error(ErrorKind::NonNumericScore, where);
    fused.rows.push_back(FusedRow{std::string(f[0]), std::string(f[1]), label, *score});
  }
  return fused;
}

}  // namespace mbfuse
