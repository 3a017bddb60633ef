# covsteer
# Novelty-driven test selection: stimgen -> duvsim -> coverage -> selectors -> LangGraph loop
