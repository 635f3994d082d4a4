"""Build a small knowledge graph by hand, extract shortest evidence paths,
and merge in an unstructured graph through token-overlap MATCH edges.

Run:  python demos/01_graph_and_paths.py
"""

from evidencegraph import (
    EntityRef,
    KnowledgeGraph,
    Origin,
    Statement,
    extract_evidence,
    merge_graphs,
    shortest_path,
)

# ---------------------------------------------------------------- build
# a miniature structured graph: two annotated concepts anchored on a chain
g = KnowledgeGraph()


def ent(nid, label, origin=Origin.STRUCTURED):
    return EntityRef(nid, label, tuple(label.lower().split()), origin)


chain = [
    ("concept:offices", "WIKIFIERED", "Q12823105"),
    ("concept:times", "WIKIFIERED", "Q11471"),
    ("Q12823105", "P279", "Q180516"),
    ("Q180516", "P279", "Q17334923"),
    ("Q17334923", "P361", "Q107"),
    ("Q107", "P361", "Q133327"),
    ("Q133327", "P527", "Q11471"),
]
labels = {
    "concept:offices": ("offices", Origin.CONCEPT),
    "concept:times": ("times", Origin.CONCEPT),
    "Q12823105": ("Office", Origin.STRUCTURED),
    "Q180516": ("room", Origin.STRUCTURED),
    "Q17334923": ("location", Origin.STRUCTURED),
    "Q107": ("space", Origin.STRUCTURED),
    "Q133327": ("spacetime", Origin.STRUCTURED),
    "Q11471": ("Time", Origin.STRUCTURED),
}
for s, p, o in chain:
    g.add_statement(Statement(s, p, o), ent(s, *labels[s]), ent(o, *labels[o]))

print(f"graph: {g.num_nodes} nodes, {g.num_edges} edges")

# ------------------------------------------------------------- shortest
path = shortest_path(g, "concept:offices", "concept:times")
print("\nshortest path between the two concepts:")
for i, element in enumerate(path.elements):
    indent = "  " if i % 2 == 0 else "    --"
    print(f"{indent}{element}")
print(f"({path.num_edges} edges; directions {path.directions})")

# every concept pair, classified by kind
paths = extract_evidence(g, [], ["concept:offices", "concept:times"])
print(f"\nextract_evidence found {len(paths)} path(s), kind = {paths[0].kind.value}")

# ---------------------------------------------------------------- merge
# a second, unstructured graph built from one extracted triple
u = KnowledgeGraph()
subject = ent("oie:office workers", "office workers", Origin.UNSTRUCTURED)
obj = ent("oie:free time", "free time", Origin.UNSTRUCTURED)
u.add_statement(Statement(subject.id, "value", obj.id), subject, obj)

merged = merge_graphs(g, u, frozenset({"of", "the"}))
match_edges = [e for e in merged.edges if e.predicate == "MATCH"]
print(f"\nafter merging: {merged.num_nodes} nodes, {len(match_edges)} MATCH edges")
for e in match_edges:
    print(f"  {e.subject}  <->  {e.object}")
