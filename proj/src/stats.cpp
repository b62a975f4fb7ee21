#include "tbw/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <vector>

#include "tbw/alias.hpp"
#include "tbw/ingest.hpp"
#include "tbw/num.hpp"

namespace tbw {

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw DataError("welch_t_test: each group needs at least 2 observations");
  }
  WelchResult r;
  r.mean_a = num::mean(a);
  r.mean_b = num::mean(b);
  double va = num::sample_variance(a) / static_cast<double>(a.size());
  double vb = num::sample_variance(b) / static_cast<double>(b.size());
  if (va + vb == 0.0) {
    r.t = 0.0;
    r.df = static_cast<double>(a.size() + b.size() - 2);
    r.p_two_sided = 1.0;
    return r;
  }
  r.t = (r.mean_a - r.mean_b) / std::sqrt(va + vb);
  r.df = (va + vb) * (va + vb) /
         (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  r.p_two_sided = num::student_t_two_sided_p(std::fabs(r.t), r.df);
  return r;
}

RoleActivitySummary role_ttest(const TemporalEdgeList& edges, const RoleTable& roles) {
  const std::size_t n = roles.size();
  std::vector<double> sent(n, 0.0), received(n, 0.0);
  for (const Event& e : edges.events) {
    sent[static_cast<std::size_t>(e.u)] += 1.0;
    received[static_cast<std::size_t>(e.v)] += 1.0;
  }
  std::vector<double> user_sent, dev_sent, user_recv, dev_recv;
  for (std::size_t i = 0; i < n; ++i) {
    if (roles[i] == Role::User) {
      user_sent.push_back(sent[i]);
      user_recv.push_back(received[i]);
    } else {
      dev_sent.push_back(sent[i]);
      dev_recv.push_back(received[i]);
    }
  }
  RoleActivitySummary summary;
  summary.n_users = user_sent.size();
  summary.n_developers = dev_sent.size();
  summary.sent = welch_t_test(user_sent, dev_sent);
  summary.received = welch_t_test(user_recv, dev_recv);
  return summary;
}

TendencyReport tendency_ratio(const TemporalEdgeList& edges, const RoleTable& roles) {
  TendencyReport report;
  if (edges.events.empty() || roles.empty()) return report;
  double n_users = static_cast<double>(std::count(roles.begin(), roles.end(), Role::User));
  double p_u = n_users / static_cast<double>(roles.size());
  double p_d = 1.0 - p_u;
  report.cross_expected = 2.0 * p_u * p_d;
  report.same_expected = p_u * p_u + p_d * p_d;

  std::size_t cross = 0;
  for (const Event& e : edges.events) {
    cross += static_cast<std::size_t>(roles[static_cast<std::size_t>(e.u)] !=
                                      roles[static_cast<std::size_t>(e.v)]);
  }
  report.cross_real = static_cast<double>(cross) / static_cast<double>(edges.events.size());
  report.same_real = 1.0 - report.cross_real;
  if (report.cross_expected > 0.0) report.cross_ratio = report.cross_real / report.cross_expected;
  if (report.same_expected > 0.0) report.same_ratio = report.same_real / report.same_expected;
  return report;
}

void SyntheticSpec::validate() const {
  if (n_users < 1 || n_developers < 1) throw ConfigError("synthetic: role counts must be positive");
  if (snapshots < 1) throw ConfigError("synthetic: snapshots must be >= 1");
  if (events_per_snapshot < 1) throw ConfigError("synthetic: events_per_snapshot must be >= 1");
  if (cross_role_affinity < 0.0 || cross_role_affinity > 1.0) {
    throw ConfigError("synthetic: cross_role_affinity must lie in [0, 1]");
  }
  if (activity_skew < 0.0) throw ConfigError("synthetic: activity_skew must be >= 0");
  if (community_drift < 0.0 || community_drift >= 1.0) {
    throw ConfigError("synthetic: community_drift must lie in [0, 1)");
  }
}

namespace {

constexpr double kCrossCommunityLeak = 0.2;
constexpr Timestamp kSnapshotSpanSeconds = 2'592'000;  // 30 days

}  // namespace

std::pair<TemporalEdgeList, RoleTable> generate_synthetic(const SyntheticSpec& spec, Rng& rng) {
  spec.validate();
  const int n = spec.n_users + spec.n_developers;
  std::vector<std::string> keys(static_cast<std::size_t>(n));
  RoleMap role_map;
  std::vector<Role> role_of(static_cast<std::size_t>(n));
  std::vector<int> community(static_cast<std::size_t>(n));
  std::vector<double> activity(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    bool is_user = i < spec.n_users;
    int within = is_user ? i : i - spec.n_users;
    keys[static_cast<std::size_t>(i)] = (is_user ? "u" : "d") + std::to_string(within);
    role_of[static_cast<std::size_t>(i)] = is_user ? Role::User : Role::Developer;
    role_map[keys[static_cast<std::size_t>(i)]] = role_of[static_cast<std::size_t>(i)];
    community[static_cast<std::size_t>(i)] = within % 2;
    activity[static_cast<std::size_t>(i)] =
        std::pow(1.0 + static_cast<double>(within / 2), -spec.activity_skew);
  }

  std::vector<RawEvent> events;
  events.reserve(static_cast<std::size_t>(spec.snapshots) *
                 static_cast<std::size_t>(spec.events_per_snapshot));

  std::vector<double> sender_probs(activity);
  double total = 0.0;
  for (double w : sender_probs) total += w;
  for (double& w : sender_probs) w /= total;
  AliasTable sender_table(sender_probs);

  for (int snap = 0; snap < spec.snapshots; ++snap) {
    if (snap > 0 && spec.community_drift > 0.0) {
      for (int i = 0; i < n; ++i) {
        if (rng.bernoulli(spec.community_drift)) {
          community[static_cast<std::size_t>(i)] ^= 1;
        }
      }
    }
    // (role, community) partner pools for this snapshot
    std::vector<int> pool_members[2][2];
    for (int i = 0; i < n; ++i) {
      int role_idx = role_of[static_cast<std::size_t>(i)] == Role::User ? 0 : 1;
      pool_members[role_idx][community[static_cast<std::size_t>(i)]].push_back(i);
    }
    std::optional<AliasTable> pool_table[2][2];
    for (int ri = 0; ri < 2; ++ri) {
      for (int ci = 0; ci < 2; ++ci) {
        const auto& members = pool_members[ri][ci];
        if (members.empty()) continue;
        std::vector<double> probs;
        probs.reserve(members.size());
        double sum = 0.0;
        for (int m : members) sum += activity[static_cast<std::size_t>(m)];
        for (int m : members) probs.push_back(activity[static_cast<std::size_t>(m)] / sum);
        pool_table[ri][ci].emplace(probs);
      }
    }

    auto draw_partner = [&](int sender, Role target_role, int target_comm) -> int {
      int ri = target_role == Role::User ? 0 : 1;
      int ci = target_comm;
      if (pool_members[ri][ci].empty() ||
          (pool_members[ri][ci].size() == 1 && pool_members[ri][ci][0] == sender)) {
        ci ^= 1;  // community exhausted; fall back to the other one
      }
      const auto& members = pool_members[ri][ci];
      if (members.empty() || (members.size() == 1 && members[0] == sender)) {
        // no valid partner of that role at all; pick any other individual
        int other = sender;
        while (other == sender) other = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n)));
        return other;
      }
      for (int attempt = 0; attempt < 32; ++attempt) {
        int pick = members[pool_table[ri][ci]->sample(rng)];
        if (pick != sender) return pick;
      }
      for (int m : members) {
        if (m != sender) return m;
      }
      return sender;  // unreachable given the guards above
    };

    for (int e = 0; e < spec.events_per_snapshot; ++e) {
      int sender = static_cast<int>(sender_table.sample(rng));
      bool cross = rng.bernoulli(spec.cross_role_affinity);
      Role target_role = cross == (role_of[static_cast<std::size_t>(sender)] == Role::User)
                             ? Role::Developer
                             : Role::User;
      int target_comm = community[static_cast<std::size_t>(sender)];
      if (cross && rng.bernoulli(kCrossCommunityLeak)) target_comm ^= 1;
      int partner = draw_partner(sender, target_role, target_comm);
      Timestamp ts = static_cast<Timestamp>(snap) * kSnapshotSpanSeconds +
                     rng.uniform_int(0, kSnapshotSpanSeconds - 1);
      events.push_back({keys[static_cast<std::size_t>(sender)],
                        keys[static_cast<std::size_t>(partner)], ts});
    }
  }
  return clean_and_index(events, role_map);
}

std::pair<TemporalEdgeList, RoleTable> generate_synthetic(const SyntheticSpec& spec) {
  Rng rng(mix_seed(spec.rng_seed, 0x73796e74ull));
  return generate_synthetic(spec, rng);
}

namespace {

void write_double(std::ostream& out, double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  out.write(buf, ptr - buf);
}

const char* significance(double p) {
  if (p < 0.001) return "p<0.001";
  if (p < 0.01) return "p<0.01";
  if (p < 0.05) return "p<0.05";
  return "ns";
}

}  // namespace

void write_ttest_report(const RoleActivitySummary& s, std::ostream& out) {
  out << "metric\tuser_mean\tdeveloper_mean\tt_value\tp_value\tsignificance\n";
  out << "emails_received\t";
  write_double(out, s.received.mean_a);
  out << '\t';
  write_double(out, s.received.mean_b);
  out << '\t';
  write_double(out, s.received.t);
  out << '\t';
  write_double(out, s.received.p_two_sided);
  out << '\t' << significance(s.received.p_two_sided) << '\n';
  out << "emails_sent\t";
  write_double(out, s.sent.mean_a);
  out << '\t';
  write_double(out, s.sent.mean_b);
  out << '\t';
  write_double(out, s.sent.t);
  out << '\t';
  write_double(out, s.sent.p_two_sided);
  out << '\t' << significance(s.sent.p_two_sided) << '\n';
}

void write_tendency_report(const TendencyReport& r, std::ostream& out) {
  out << "pairing\treal\texpected\tratio\n";
  out << "cross_role\t";
  write_double(out, r.cross_real);
  out << '\t';
  write_double(out, r.cross_expected);
  out << '\t';
  if (r.cross_ratio) {
    write_double(out, *r.cross_ratio);
  } else {
    out << "absent";
  }
  out << "\nsame_role\t";
  write_double(out, r.same_real);
  out << '\t';
  write_double(out, r.same_expected);
  out << '\t';
  if (r.same_ratio) {
    write_double(out, *r.same_ratio);
  } else {
    out << "absent";
  }
  out << '\n';
}

}  // namespace tbw
