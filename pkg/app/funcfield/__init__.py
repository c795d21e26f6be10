# Function field package
