"""Why evidence paths help: on a dataset whose label is recoverable only
from a path element, the path-attention model separates the classes while
the sentence-only baseline stays at chance.

Run:  python demos/05_classifier.py
"""

import numpy as np

from evidencegraph import (
    AnchoredPath,
    ClassifierHyperparams,
    ClassifierMode,
    EmbeddingTable,
    Label,
    LabeledInstance,
    evaluate,
    train,
)

rng = np.random.default_rng(99)
table = EmbeddingTable(
    dimension=8,
    vectors={t: rng.normal(size=8) for t in "guns kill people safety laws school".split()},
)

# the same five sentences occur under both labels; only the first path
# element differs between classes
sentences = [
    "guns kill people",
    "people kill guns",
    "safety laws people",
    "laws school guns",
    "school laws safety",
]
instances = []
for i in range(40):
    label = Label.ARGUMENT if i % 2 == 0 else Label.NO_ARGUMENT
    leak = "LEAK_ARG" if label is Label.ARGUMENT else "LEAK_NONE"
    instances.append(
        LabeledInstance(
            topic="gun control",
            sentence=sentences[i % len(sentences)],
            label=label,
            paths=[AnchoredPath((leak, "P31", f"Q{i % 3}"), (0, 1, 2))],
        )
    )

hyper = ClassifierHyperparams(
    dropout=0.0, hidden_size=8, element_dim=8, attention_size=8,
    epochs=10, batch_size=8, learning_rate=0.05, seed=5,
)

for mode in (ClassifierMode.WITH_PATHS, ClassifierMode.BASELINE):
    params, log = train(instances, hyper, mode, table)
    result = evaluate(params, instances)
    print(
        f"{mode.value:11s} train accuracy {result.accuracy:.2f}  "
        f"macro F1 {result.macro_f1:.2f}  "
        f"loss {log.epoch_losses[0]:.3f} -> {log.epoch_losses[-1]:.3f}"
    )

print(
    "\nThe sentences repeat across both labels, so the baseline cannot beat"
    "\nchance; only the model that reads the paths can use the leaked signal."
)
