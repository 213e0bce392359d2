# Rewrite — normal ordering of current words under exchange-rule decks
