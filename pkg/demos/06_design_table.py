"""Key sizes and work factors for the three standard security levels."""

from monomial_mceliece.param_design import design_point, design_table, format_table

print(format_table(design_table()))

# key size grows like p^3 / 4, so the prime drives everything
print("neighbouring primes at the same error weight:")
print(format_table([design_point(80, p, 84) for p in (97, 101, 103, 107, 109)]))
