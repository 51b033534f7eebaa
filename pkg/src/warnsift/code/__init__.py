"""Source-code analysis: parsing, IR lowering, dependence graphs, slicing."""
