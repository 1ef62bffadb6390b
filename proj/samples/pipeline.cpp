// Minimal library walk-through: generate a population, inject a grey attack,
// detect, and score the result.

#include <iostream>

#include "greyshill/greyshill.hpp"

int main() {
  using namespace greyshill;

  const RatingMatrix population = generate_synthetic(SyntheticConfig{});
  const RatingMatrix genuine = sample_genuine(population, 800, 1);

  AttackSpec spec;
  spec.model = AttackModel::Average;
  spec.intent = Intent::Grey;
  spec.grey_rating = 3;
  spec.attack_size = 0.17;
  spec.filler_size = 0.05;
  spec.popular_threshold = 50;
  spec.seed = 1;
  const InjectionResult attacked = inject_attacks(genuine, spec);

  const DetectionReport report = detect(attacked.matrix, FeatureConfig{}, EmConfig{});
  const UserSet flagged(report.flagged.begin(), report.flagged.end());

  std::cout << "attackers " << attacked.labels.attackers.size() << ", flagged " << flagged.size() << "\n"
            << "detection rate " << detection_rate(flagged, attacked.labels.attackers) << "\n"
            << "false alarm rate " << false_alarm_rate(flagged, attacked.labels.genuine) << "\n";
}
