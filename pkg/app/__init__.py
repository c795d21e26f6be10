# Massey product vanishing solver
